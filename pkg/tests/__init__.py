"""Test package for dpflow."""
