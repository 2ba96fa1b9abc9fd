"""Campaign driver: point grids, worker pool, CSV persistence, sweeps.

A campaign point is one (family, distance, physical noise) experiment; its
shots are split into chunks distributed over a process pool.  Per-shot
seeds depend only on (campaign seed, point id, shot index), so the CSV is
bit-identical for any worker count.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass
from multiprocessing import get_context

import numpy as np

from . import memory as M
from .gates import NoiseConfig

CSV_FIELDS = ["family", "d", "d_eff", "p", "p_sh_ld", "p_sh_st", "p_meas",
              "shots", "failures_x", "failures_z", "failures", "p_l",
              "stderr", "seed"]


@dataclass
class CampaignConfig:
    families: list
    distances: list
    p_values: list
    shots: int = 10000
    seed: int = 2024
    workers: int = 1
    p_sh_ld: float = 0.0
    p_sh_st: float = 0.0
    sparse_gadgets: bool = False
    w_x_divisor: float = 10.0
    output: str = ""

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        for d in self.distances:
            if d % 2 == 0:
                raise ValueError("distances must be odd")
        for p in list(self.p_values) + [self.p_sh_ld, self.p_sh_st]:
            if not 0.0 <= p <= 1.0:
                raise ValueError("probabilities must lie in [0, 1]")

    @classmethod
    def from_file(cls, path: str) -> "CampaignConfig":
        with open(path, "rb") as fh:
            raw = fh.read()
        if path.endswith(".toml"):
            try:
                import tomllib
            except ImportError:
                import tomli as tomllib
            data = tomllib.loads(raw.decode())
        else:
            data = json.loads(raw.decode())
        return cls(**data)

    def points(self):
        pid = 0
        for family in self.families:
            for d in self.distances:
                for p in self.p_values:
                    yield pid, family, d, p
                    pid += 1


_WORKER_EXP = None


def point_table_seed(seed: int, pid: int) -> int:
    """Per-point location-draw seed: every (family, d, p) configuration
    samples its own frozen gate locations, as one campaign per point."""
    return (seed * 0x9E3779B97F4A7C15 + pid * 0xD1B54A32D192ED03 + 1) \
        & ((1 << 63) - 1)


def _worker_init(family, d, p, cfg_dict):
    global _WORKER_EXP
    noise = NoiseConfig.from_common_infidelity(
        p, p_sh_ld=cfg_dict["p_sh_ld"], p_sh_st=cfg_dict["p_sh_st"])
    _WORKER_EXP = M.compile_experiment(
        family, d, noise, p, seed=cfg_dict["table_seed"],
        sparse_gadgets=cfg_dict["sparse_gadgets"],
        w_x_divisor=cfg_dict["w_x_divisor"])


def _worker_chunk(args):
    seed, pid, lo, hi = args
    fx = fz = fa = 0
    for shot in range(lo, hi):
        res = M.run_shot(_WORKER_EXP, seed, pid, shot)
        fx += res.fail_x
        fz += res.fail_z
        fa += res.fail_x or res.fail_z
    return fx, fz, fa


def run_point(cfg: CampaignConfig, pid: int, family: str, d: int, p: float,
              exp=None) -> dict:
    """All shots of one campaign point, optionally on a worker pool."""
    table_seed = point_table_seed(cfg.seed, pid)
    cfg_dict = {"p_sh_ld": cfg.p_sh_ld, "p_sh_st": cfg.p_sh_st,
                "table_seed": table_seed,
                "sparse_gadgets": cfg.sparse_gadgets,
                "w_x_divisor": cfg.w_x_divisor}
    shots = cfg.shots
    if cfg.workers > 1:
        chunk = max(250, shots // (cfg.workers * 8))
        jobs = [(cfg.seed, pid, lo, min(lo + chunk, shots))
                for lo in range(0, shots, chunk)]
        ctx = get_context("fork")
        with ctx.Pool(cfg.workers, initializer=_worker_init,
                      initargs=(family, d, p, cfg_dict)) as pool:
            parts = pool.map(_worker_chunk, jobs)
        fx = sum(r[0] for r in parts)
        fz = sum(r[1] for r in parts)
        fa = sum(r[2] for r in parts)
    else:
        if exp is None:
            noise = NoiseConfig.from_common_infidelity(
                p, p_sh_ld=cfg.p_sh_ld, p_sh_st=cfg.p_sh_st)
            exp = M.compile_experiment(family, d, noise, p, seed=table_seed,
                                       sparse_gadgets=cfg.sparse_gadgets,
                                       w_x_divisor=cfg.w_x_divisor)
        fx = fz = fa = 0
        for shot in range(shots):
            res = M.run_shot(exp, cfg.seed, pid, shot)
            fx += res.fail_x
            fz += res.fail_z
            fa += res.fail_x or res.fail_z
    p_l = fa / shots
    d_eff = d if family == "css_ld" else d / math.sqrt(2.0)
    return {
        "family": family, "d": d, "d_eff": round(d_eff, 6), "p": p,
        "p_sh_ld": cfg.p_sh_ld, "p_sh_st": cfg.p_sh_st, "p_meas": p,
        "shots": shots, "failures_x": fx, "failures_z": fz, "failures": fa,
        "p_l": p_l,
        "stderr": math.sqrt(max(p_l * (1 - p_l), 1.0 / shots) / shots),
        "seed": cfg.seed,
    }


def run_campaign(cfg: CampaignConfig, progress=None) -> list[dict]:
    rows = []
    for pid, family, d, p in cfg.points():
        row = run_point(cfg, pid, family, d, p)
        rows.append(row)
        if progress:
            progress(row)
    return rows


def write_csv(rows: list[dict], path_or_buf) -> None:
    close = False
    if isinstance(path_or_buf, (str, os.PathLike)):
        fh = open(path_or_buf, "w", newline="")
        close = True
    else:
        fh = path_or_buf
    try:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row[k] for k in CSV_FIELDS})
    finally:
        if close:
            fh.close()


def rows_to_csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


def read_csv(path: str) -> list[dict]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            for key in ("d", "shots", "failures_x", "failures_z", "failures",
                        "seed"):
                row[key] = int(row[key])
            for key in ("d_eff", "p", "p_sh_ld", "p_sh_st", "p_meas", "p_l",
                        "stderr"):
                row[key] = float(row[key])
            out.append(row)
    return out


def estimate_crossings(rows: list[dict]) -> dict:
    """Pairwise crossings of log P_L between distances, per family.

    Linear interpolation in (p, log P_L); a pair of distances contributes
    one crossing if their difference curve changes sign inside the grid.
    Returns {family: {"crossings": [...], "estimate": mean, "spread": ...}}.
    """
    out = {}
    families = sorted({r["family"] for r in rows})
    for family in families:
        fam_rows = [r for r in rows if r["family"] == family and r["p_l"] > 0]
        dists = sorted({r["d"] for r in fam_rows})
        curves = {}
        for d in dists:
            pts = sorted((r["p"], math.log(r["p_l"]))
                         for r in fam_rows if r["d"] == d)
            curves[d] = pts
        crossings = []
        for i in range(len(dists)):
            for j in range(i + 1, len(dists)):
                d1, d2 = dists[i], dists[j]
                ps = sorted(set(p for p, _ in curves[d1])
                            & set(p for p, _ in curves[d2]))
                if len(ps) < 2:
                    continue
                diff = []
                for p in ps:
                    l1 = dict(curves[d1])[p]
                    l2 = dict(curves[d2])[p]
                    diff.append(l2 - l1)
                for k in range(len(ps) - 1):
                    if diff[k] == 0:
                        crossings.append(ps[k])
                    elif diff[k] * diff[k + 1] < 0:
                        frac = diff[k] / (diff[k] - diff[k + 1])
                        crossings.append(ps[k] + frac * (ps[k + 1] - ps[k]))
        if crossings:
            out[family] = {
                "crossings": crossings,
                "estimate": float(np.mean(crossings)),
                "spread": float(np.max(crossings) - np.min(crossings)),
            }
        else:
            out[family] = {"crossings": [], "estimate": None, "spread": None}
    return out
