"""Model layer unit tests."""
