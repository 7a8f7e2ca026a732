"""Utility functions for wavegen."""

import os
import tempfile
from pathlib import Path


def resolve_output_path(path: str | Path) -> Path:
    """Resolve an output path and check that its directory can receive files.

    Args:
        path: Destination file path, relative to the current directory or
            absolute.

    Returns:
        The resolved absolute path.

    Raises:
        OSError: If the parent directory does not exist, is not a directory, or
            is not writable, or if the path itself names a directory.
    """
    resolved = Path(path).expanduser().resolve()
    parent = resolved.parent
    if not parent.is_dir():
        raise OSError(f"Directory does not exist: {parent}")
    if resolved.is_dir():
        raise OSError(f"Path is a directory: {resolved}")
    if not os.access(parent, os.W_OK):
        raise OSError(f"Directory is not writable: {parent}")
    return resolved


def atomic_write_bytes(path: str | Path, data: bytes) -> Path:
    """Write bytes to a file atomically.

    The data goes to a temporary file in the destination directory which is
    then renamed over the target, so readers never observe a partial file.

    Args:
        path: Destination file path.
        data: Complete file contents.

    Returns:
        The resolved destination path.

    Raises:
        OSError: If the destination directory is missing or not writable.
    """
    target = resolve_output_path(path)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent)
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp_name, target)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise
    return target


def atomic_write_text(path: str | Path, text: str) -> Path:
    """Write UTF-8 text to a file atomically. See atomic_write_bytes."""
    return atomic_write_bytes(path, text.encode("utf-8"))


def format_file_size(size_bytes: float) -> str:
    """Format file size in human-readable format.

    Args:
        size_bytes: Size in bytes. Should be non-negative.

    Returns:
        A string such as "1.5 KB" using binary units, one decimal place.
    """
    for unit in ["B", "KB", "MB", "GB"]:
        if size_bytes < 1024.0:
            return f"{size_bytes:.1f} {unit}"
        size_bytes /= 1024.0
    return f"{size_bytes:.1f} TB"


def format_residual(value: float) -> str:
    """Format a residual in scientific notation with four significant digits."""
    return f"{value:.4e}"
