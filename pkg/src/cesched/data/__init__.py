"""Bundled machine configurations and the mini-kernel corpus."""
from __future__ import annotations

from importlib import resources
from typing import Dict, List

CORPUS_SUFFIX = ".comp.c"


def corpus_names() -> List[str]:
    root = resources.files(__name__).joinpath("corpus")
    return sorted(p.name[: -len(CORPUS_SUFFIX)] for p in root.iterdir()
                  if p.name.endswith(CORPUS_SUFFIX))


def corpus_source(name: str) -> str:
    return resources.files(__name__).joinpath("corpus", name + CORPUS_SUFFIX).read_text()


def corpus_path(name: str) -> str:
    return str(resources.files(__name__).joinpath("corpus", name + CORPUS_SUFFIX))


def corpus() -> Dict[str, str]:
    return {name: corpus_source(name) for name in corpus_names()}
