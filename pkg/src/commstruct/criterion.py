"""The three-ratio community-structure verdict and its report record."""
from __future__ import annotations

import hashlib
import io
import json
import math
import time
from dataclasses import dataclass, field
from typing import Sequence, TextIO

from .conductance import CommunityBounds, c_ratio, discover_communities
from .entropy import maximize_entropy_ratio
from .errors import ParseError
from .graph import Graph, format_edge_list
from .modularity import DEFAULT_RESTARTS, maximize_modularity

DEFAULT_THRESHOLDS = (0.0, 0.3, 0.3)

HAS_STRUCTURE = "has_structure"
NO_STRUCTURE = "no_structure"
INDETERMINATE = "indeterminate"
VERDICTS = (HAS_STRUCTURE, NO_STRUCTURE, INDETERMINATE)


@dataclass(frozen=True)
class EvaluateOptions:
    restarts: int = DEFAULT_RESTARTS
    seed: int = 0
    bounds: CommunityBounds | None = None  # None: size window from n
    log_base: float = 2.0
    thresholds: tuple[float, float, float] = DEFAULT_THRESHOLDS
    degree_mode: str = "full"
    seed_fraction: float | None = None
    workers: int = 1
    record_times: bool = False


def indicator_bits(tau: float, sigma: float, theta: float | None,
                   thresholds: Sequence[float] = DEFAULT_THRESHOLDS) -> tuple[bool, bool, bool | None]:
    t_tau, t_sigma, t_theta = thresholds
    return (tau > t_tau, sigma > t_sigma, None if theta is None else theta > t_theta)


def verdict_for(tau: float, sigma: float, theta: float | None,
                thresholds: Sequence[float] = DEFAULT_THRESHOLDS) -> str:
    if theta is None:
        return INDETERMINATE
    return HAS_STRUCTURE if all(indicator_bits(tau, sigma, theta, thresholds)) else NO_STRUCTURE


@dataclass
class RatioReport:
    tau: float
    sigma: float
    theta: float | None
    thresholds: tuple[float, float, float] = DEFAULT_THRESHOLDS
    provenance: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return verdict_for(self.tau, self.sigma, self.theta, self.thresholds)

    @property
    def bits(self) -> tuple[bool, bool, bool | None]:
        return indicator_bits(self.tau, self.sigma, self.theta, self.thresholds)

    def to_record(self) -> str:
        """Flat ``key=value`` text, one pair per line."""
        lines = [
            f"tau={self.tau!r}",
            f"sigma={self.sigma!r}",
            f"theta={'none' if self.theta is None else repr(self.theta)}",
            f"verdict={self.verdict}",
            "thresholds=" + ",".join(repr(float(t)) for t in self.thresholds),
        ]
        for key in sorted(self.provenance):
            lines.append(f"provenance.{key}={json.dumps(self.provenance[key], sort_keys=True)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_record(cls, text: str | TextIO) -> "RatioReport":
        stream = io.StringIO(text) if isinstance(text, str) else text
        values: dict[str, str] = {}
        provenance: dict = {}
        for lineno, raw in enumerate(stream, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ParseError(f"expected key=value, got {line!r}", lineno)
            if key.startswith("provenance."):
                provenance[key[len("provenance."):]] = json.loads(value)
            else:
                values[key] = value
        try:
            theta = None if values["theta"] == "none" else float(values["theta"])
            report = cls(float(values["tau"]), float(values["sigma"]), theta,
                         tuple(float(t) for t in values["thresholds"].split(",")), provenance)
        except KeyError as exc:
            raise ParseError(f"missing field {exc.args[0]!r}") from None
        if "verdict" in values and values["verdict"] != report.verdict:
            raise ParseError("stored verdict disagrees with the stored ratios")
        return report


def graph_digest(G: Graph) -> str:
    return hashlib.sha256(format_edge_list(G).encode()).hexdigest()


def evaluate(G: Graph, opts: EvaluateOptions = EvaluateOptions(),
             provenance: dict | None = None) -> RatioReport:
    """Estimate all three ratios with shared options and assemble the report.

    The modularity partition is passed to the entropy optimizer as an extra
    candidate. When no community size is admissible the conductance ratio is
    left undefined and the verdict is indeterminate.
    """
    prov = {"n": G.n, "m": G.m, "seed": opts.seed, "restarts": opts.restarts,
            "degree_mode": opts.degree_mode, "heuristic": True}
    if provenance:
        prov.update(provenance)
    else:
        prov["source_sha256"] = graph_digest(G)
    times = {}

    t0 = time.perf_counter()
    mod = maximize_modularity(G, opts.restarts, opts.seed, opts.workers)
    times["sigma"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    ent = maximize_entropy_ratio(G, opts.restarts, opts.seed, candidates=[mod.partition],
                                 degree_mode=opts.degree_mode, workers=opts.workers)
    times["tau"] = time.perf_counter() - t0

    bounds = opts.bounds or CommunityBounds.default(G.n, opts.log_base)
    theta = None
    if bounds is None:
        prov["bounds"] = None
    else:
        prov["bounds"] = [bounds.min_size, bounds.max_size]
        t0 = time.perf_counter()
        cs = discover_communities(G, bounds, opts.seed_fraction, opts.seed, opts.workers)
        times["theta"] = time.perf_counter() - t0
        theta = c_ratio(cs)
        prov["communities"] = len(cs)
        prov["covered"] = len(cs.coverage)
    prov["modules_sigma"] = mod.partition.module_count
    prov["modules_tau"] = ent.partition.module_count
    if opts.record_times:
        prov["wall_seconds"] = {k: round(v, 6) for k, v in times.items()}
    return RatioReport(ent.value, mod.value, theta, tuple(opts.thresholds), prov)


@dataclass
class HypothesisSummary:
    """Pairwise agreement of the (tau, sigma, theta) indicator bits."""

    agreement: list[list[float]]
    disagreeing: list[int]
    skipped: list[int]
    count: int

    @property
    def full_agreement(self) -> bool:
        return not self.disagreeing


def check_hypothesis(reports: Sequence[RatioReport]) -> HypothesisSummary:
    if not reports:
        raise ValueError("need at least one report")
    usable = [(i, r.bits) for i, r in enumerate(reports) if r.theta is not None]
    skipped = [i for i, r in enumerate(reports) if r.theta is None]
    agree = [[math.nan] * 3 for _ in range(3)]
    if usable:
        for a in range(3):
            for b in range(3):
                agree[a][b] = sum(bits[a] == bits[b] for _, bits in usable) / len(usable)
    disagreeing = [i for i, bits in usable if len(set(bits)) > 1]
    return HypothesisSummary(agree, disagreeing, skipped, len(reports))
