"""End-to-end scan runs and their JSON report shapes."""
from __future__ import annotations

import json

from .calibration import (CalibrationResult, conventional_threshold,
                          simulate_null, solve_alpha_tilde)
from .detection import (Detection, blocked_scan, conventional_scan,
                        detections_to_dicts, minimal_rects)
from .enumeration import RectangleIndex
from .model import Dataset

__all__ = ["ScanOutcome", "run_scan", "report_json"]


class ScanOutcome:
    """Everything one scan run produced, ready for reporting or plotting."""

    def __init__(self, alpha: float, n_perms: int, seed: int, weight_scheme: str,
                 two_sided: bool):
        self.alpha = alpha
        self.n_perms = n_perms
        self.seed = seed
        self.weight_scheme = weight_scheme
        self.two_sided = two_sided
        self.calibration: CalibrationResult | None = None
        self.blocked: list[Detection] | None = None
        self.blocked_minimal: list[Detection] | None = None
        self.conventional: list[Detection] | None = None
        self.conventional_minimal: list[Detection] | None = None
        self.conventional_thr: float | None = None

    def report(self) -> dict:
        common = {
            "alpha": self.alpha,
            "n_perms": self.n_perms,
            "seed": self.seed,
            "two_sided": self.two_sided,
        }
        parts = {}
        if self.blocked is not None:
            parts["blocked"] = dict(
                common, method="blocked",
                alpha_tilde=self.calibration.alpha_tilde,
                weight_scheme=self.weight_scheme,
                union_rate=self.calibration.union_rate,
                thresholds=[{"ell": ell,
                             "level": self.calibration.levels[ell],
                             "q": self.calibration.thresholds[ell]}
                            for ell in self.calibration.block_ids],
                detections=detections_to_dicts(self.blocked),
                minimal=detections_to_dicts(self.blocked_minimal))
        if self.conventional is not None:
            parts["conventional"] = dict(
                common, method="conventional",
                threshold=self.conventional_thr,
                detections=detections_to_dicts(self.conventional),
                minimal=detections_to_dicts(self.conventional_minimal))
        if len(parts) == 1:
            return next(iter(parts.values()))
        return dict(common, method="both", **parts)


def run_scan(dataset: Dataset, alpha: float = 0.05, n_perms: int = 1000,
             seed: int = 0, weight_scheme: str = "ell2",
             two_sided: bool = False, method: str = "blocked",
             include_identity: bool = False, workers: int = 1,
             index: RectangleIndex | None = None) -> ScanOutcome:
    """Ingestion downstream: enumeration, calibration, detection, minimality."""
    if method not in ("blocked", "conventional", "both"):
        raise ValueError(f"unknown method {method!r}")
    if index is None:
        index = RectangleIndex(dataset)
    table = simulate_null(dataset, n_perms, seed, index=index,
                          two_sided=two_sided, include_identity=include_identity,
                          workers=workers)
    out = ScanOutcome(alpha, n_perms, seed, weight_scheme, two_sided)
    if method in ("blocked", "both"):
        out.calibration = solve_alpha_tilde(table, alpha, weight_scheme)
        out.blocked = blocked_scan(dataset, out.calibration, index=index)
        out.blocked_minimal = minimal_rects(out.blocked)
    if method in ("conventional", "both"):
        out.conventional = conventional_scan(dataset, table, alpha, index=index)
        out.conventional_minimal = minimal_rects(out.conventional)
        out.conventional_thr = conventional_threshold(table, alpha)
    return out


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"
