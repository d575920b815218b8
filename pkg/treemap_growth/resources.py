#!/usr/bin/env python

"""Resource management utilities."""

from functools import lru_cache
from importlib.resources import files
from pathlib import Path
from typing import Any, Dict, Union

import yaml


def get_path(*, path: Union[Path, str], name: str = __name__) -> Path:
    """
    Resolves the absolute path for a given relative path in reference to a package.

    Args:
        path: The relative path to be resolved.
        name: The name of the module from which to resolve the relative path.

    Returns:
        Path: The absolute path.
    """
    top_package = name[: name.index(".")]
    return Path(str(files(top_package).joinpath(str(path))))


def get_text(*, path: Union[Path, str]) -> str:
    """
    Retrieves the contents of a packaged file.

    Args:
        path: The relative path of the file for which to retrieve the contents

    Returns:
        str: The contents of the file.
    """
    return get_path(path=path).read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def get_bands() -> Dict[str, Dict[str, Any]]:
    """
    Retrieves the acceptance and reference bands of every experiment.

    Returns:
        Mapping of experiment name to its band record.
    """
    return yaml.safe_load(get_text(path="data/bands.yaml"))
