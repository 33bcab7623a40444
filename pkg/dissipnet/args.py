import argparse
from pathlib import Path


def output_dir(path_string: str) -> Path:
    """Argparse type check for an output directory, which may not exist yet."""
    path = Path(path_string)
    if path.exists() and not path.is_dir():
        msg = f"{path_string} exists and is not a directory"
        raise argparse.ArgumentTypeError(msg)
    return path


def positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        msg = f"{value} is not a positive integer"
        raise argparse.ArgumentTypeError(msg)
    return number
