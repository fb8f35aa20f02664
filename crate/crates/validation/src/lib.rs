//! Acceptance criteria for the workspace live in `tests/acceptance.rs`.
