"""The benchmark corpus shipped with the package."""
from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Optional

from .ast import ProgramAst
from .parser import parse_file, substitute_params

# name -> (callee names implemented elsewhere in the corpus, reconstructed?)
CORPUS = {
    "binary_search": ((), False),
    "binary_search_bug": ((), False),
    "tritype": ((), False),
    "tritype_bug": ((), False),
    "bubble_sort": ((), True),
    "selection_sort": (("findMin",), True),
    "findMin": ((), True),
    "sum_of_squares": ((), True),
}

# correct program -> its buggy variant
BUGGY = {"binary_search": "binary_search_bug", "tritype": "tritype_bug"}


def corpus_dir() -> Path:
    return Path(str(resources.files("cpverify").joinpath("corpus")))


def corpus_path(name: str) -> Path:
    if name not in CORPUS:
        raise KeyError(f"no corpus program named {name!r}")
    return corpus_dir() / f"{name}.cpv"


def load(name: str, params: Optional[dict] = None) -> ProgramAst:
    """Parse a corpus program, binding its symbolic bounds when ``params`` is given."""
    ast = parse_file(corpus_path(name))
    return substitute_params(ast, params) if params is not None else ast


def callees(name: str) -> dict:
    """Unbound implementations of the functions ``name`` calls through contracts."""
    return {c: load(c) for c in CORPUS[name][0]}


def corpus() -> dict:
    """Every corpus program, parsed but with symbolic bounds left in place."""
    return {name: load(name) for name in CORPUS}
