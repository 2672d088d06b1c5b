//! Acceptance checks for `crnf` live in `tests/acceptance.rs`; run them with
//! `cargo test -p crnf-acceptance --test acceptance`.
