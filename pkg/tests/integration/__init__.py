# Integration tests for senbe
