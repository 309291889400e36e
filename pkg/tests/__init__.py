"""Test package for RAG-ES system."""
