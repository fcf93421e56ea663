class FigureError(Exception):
    """Unusable input: missing file, missing columns, or malformed data."""
