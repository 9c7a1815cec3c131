"""Tagger command-line application."""
