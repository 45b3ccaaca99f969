from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple

from . import nodes as n


class SegmentKind(str, Enum):
    FOR = "WorksharingFor"
    SECTIONS = "WorksharingSections"
    SINGLE = "WorksharingSingle"
    BLOCK = "PlainBlock"


@dataclass(frozen=True)
class ParallelSegment:
    id: int
    kind: SegmentKind
    body: Tuple[n.Stmt, ...]
    region_id: int

    @property
    def construct(self):
        """The worksharing node for worksharing segments, else None."""
        return self.body[0] if self.kind is not SegmentKind.BLOCK else None

    @property
    def nowait(self) -> bool:
        c = self.construct
        return bool(c is not None and c.nowait)


_KIND = {n.OmpFor: SegmentKind.FOR, n.OmpSections: SegmentKind.SECTIONS,
         n.OmpSingle: SegmentKind.SINGLE}


def partition_segments(region: n.ParallelRegion, region_id: int = 0) -> List[ParallelSegment]:
    """Split a validated region body at barriers and worksharing constructs."""
    out: List[ParallelSegment] = []
    run: List[n.Stmt] = []

    def flush():
        if run:
            out.append(ParallelSegment(len(out), SegmentKind.BLOCK, tuple(run), region_id))
            run.clear()

    for s in region.body.stmts:
        if isinstance(s, n.Barrier):
            flush()
        elif isinstance(s, n.WORKSHARING):
            flush()
            out.append(ParallelSegment(len(out), _KIND[type(s)], (s,), region_id))
        else:
            run.append(s)
    flush()
    return out


def parallel_regions(program: n.Program) -> List[n.ParallelRegion]:
    """All parallel regions in source order."""
    return [x for x in n.walk(program) if isinstance(x, n.ParallelRegion)]


def omp_fors(program: n.Program) -> List[n.OmpFor]:
    return [x for x in n.walk(program) if isinstance(x, n.OmpFor)]
