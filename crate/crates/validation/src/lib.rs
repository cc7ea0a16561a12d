//! Holds the `acceptance` target, which runs after the other workspace tests.
