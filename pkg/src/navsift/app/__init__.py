"""Command line and HTTP surfaces over the pipeline."""
