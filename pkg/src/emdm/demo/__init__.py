"""Bundled example schemes and datasets."""
