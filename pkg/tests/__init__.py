"""Unit tests for PII de-identification pipeline."""
