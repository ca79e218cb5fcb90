//! Holds the `acceptance` test target only. Run it with
//! `cargo test -p xrepair-verify --test acceptance`.
