"""Lexing, parsing, validation, segmenting and pretty-printing."""
from __future__ import annotations

from typing import Union

from . import nodes
from .emitter import emit_expr, emit_source, emit_text
from .lexer import SourceProgram, tokenize
from .nodes import Program
from .parser import parse_source
from .segments import (ParallelSegment, SegmentKind, omp_fors, parallel_regions,
                       partition_segments)
from .validate import validate


def parse(source: Union[SourceProgram, str], path: str = "<string>") -> Program:
    """Parse and validate mini-OpenMP source.

    Raises LexError, ParseError or ValidationError, each carrying
    diagnostics with line/column positions.
    """
    if isinstance(source, str):
        source = SourceProgram(source, path)
    program = parse_source(source)
    return validate(program, source.path)


def parse_file(path) -> Program:
    return parse(SourceProgram.from_file(path))


__all__ = [
    "nodes", "Program", "SourceProgram", "ParallelSegment", "SegmentKind",
    "parse", "parse_file", "parse_source", "validate", "tokenize",
    "partition_segments", "parallel_regions", "omp_fors",
    "emit_source", "emit_text", "emit_expr",
]
