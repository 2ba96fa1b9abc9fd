"""Command-line driver: calibrate, tables, run, sweep, verify, plot-data."""

from __future__ import annotations

import json
import os

import click
import numpy as np

from . import channels as C
from . import circuits as CC
from . import experiment as E
from . import gates as G
from . import memory as M
from . import tables as T


def _output_dir(path: str | None) -> str:
    out = path or os.environ.get("STQEC_OUTPUT_DIR", ".")
    os.makedirs(out, exist_ok=True)
    return out


def _load_config(config, **overrides) -> E.CampaignConfig:
    if config:
        cfg = E.CampaignConfig.from_file(config)
        for key, value in overrides.items():
            if value is not None:
                setattr(cfg, key, value)
        return cfg
    missing = [k for k in ("families", "distances", "p_values")
               if overrides.get(k) in (None, (), [])]
    if missing:
        raise click.UsageError(f"need a config file or --{missing[0]}")
    return E.CampaignConfig(**{k: v for k, v in overrides.items()
                               if v is not None})


@click.group()
def main():
    """Singlet-triplet erasure-qubit QEC laboratory."""


@main.command()
@click.option("--fbar", "-f", multiple=True, type=float, default=(0.999,),
              help="target average fidelities")
@click.option("--out", type=click.Path(), default=None)
def calibrate(fbar, out):
    """Timing-jitter calibration report per gate family."""
    rows = []
    for f in fbar:
        rows.extend(G.calibration_report({fam: f for fam in G.FAMILIES}))
    click.echo(json.dumps(rows, indent=2))
    if out:
        with open(out, "w") as fh:
            json.dump(rows, fh, indent=2)


@main.command()
@click.option("--family", type=click.Choice(["css_ld", "css_st", "xzzx_st"]),
              required=True)
@click.option("--distance", "-d", type=int, required=True)
@click.option("--p", type=float, required=True)
@click.option("--seed", type=int, default=2024)
@click.option("--outdir", type=click.Path(), default=None)
def tables(family, distance, p, seed, outdir):
    """Generate and serialise the per-location twirled error tables."""
    outdir = _output_dir(outdir)
    noise = G.NoiseConfig.from_common_infidelity(p)
    exp = M.compile_experiment(family, distance, noise, p, seed=seed)
    count = 0
    for s in exp.layout.stabilisers:
        circ = M.stabiliser_circuit(exp.layout, s)
        tab = T.ShotTable(cum=exp.stab_cum[s.index],
                          legs=exp.stab_legs[s.index],
                          anc=exp.stab_anc[s.index],
                          header={"circuit": circ.name, "stab": s.index,
                                  "family": family, "d": distance, "p": p,
                                  "seed": seed})
        chan = T.table_to_channel(tab, circ.n_spins)
        chan.header = tab.header
        path = os.path.join(outdir, f"{family}_d{distance}_stab{s.index}.json")
        with open(path, "w") as fh:
            fh.write(chan.to_json())
        count += 1
    click.echo(f"wrote {count} stabiliser tables to {outdir}")


@main.command()
@click.option("--config", type=click.Path(exists=True), default=None)
@click.option("--family", "families", multiple=True)
@click.option("--distance", "-d", "distances", multiple=True, type=int)
@click.option("--p", "p_values", multiple=True, type=float)
@click.option("--shots", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--workers", type=int, default=None)
@click.option("--p-sh-ld", type=float, default=None)
@click.option("--p-sh-st", type=float, default=None)
@click.option("--sparse-gadgets", is_flag=True, default=None)
@click.option("--w-x-divisor", type=float, default=None)
@click.option("--out", type=click.Path(), default=None)
def run(config, families, distances, p_values, shots, seed, workers,
        p_sh_ld, p_sh_st, sparse_gadgets, w_x_divisor, out):
    """Monte-Carlo memory campaign; writes one CSV row per point."""
    cfg = _load_config(config, families=list(families) or None,
                       distances=list(distances) or None,
                       p_values=list(p_values) or None,
                       shots=shots, seed=seed, workers=workers,
                       p_sh_ld=p_sh_ld, p_sh_st=p_sh_st,
                       sparse_gadgets=sparse_gadgets,
                       w_x_divisor=w_x_divisor)
    rows = E.run_campaign(cfg, progress=lambda r: click.echo(
        f"{r['family']} d={r['d']} p={r['p']:.4f}: "
        f"P_L={r['p_l']:.5f} ({r['failures']}/{r['shots']})"))
    path = out or os.path.join(_output_dir(None), "memory.csv")
    E.write_csv(rows, path)
    click.echo(f"wrote {path}")


@main.command()
@click.option("--config", type=click.Path(exists=True), default=None)
@click.option("--family", "families", multiple=True)
@click.option("--distance", "-d", "distances", multiple=True, type=int)
@click.option("--p", "p_values", multiple=True, type=float)
@click.option("--shots", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--workers", type=int, default=None)
@click.option("--out", type=click.Path(), default=None)
def sweep(config, families, distances, p_values, shots, seed, workers, out):
    """Threshold sweep: campaign plus pairwise crossing estimates."""
    cfg = _load_config(config, families=list(families) or None,
                       distances=list(distances) or None,
                       p_values=list(p_values) or None,
                       shots=shots, seed=seed, workers=workers)
    if len(cfg.distances) < 2 or len(cfg.p_values) < 3:
        raise click.UsageError("sweep needs >= 2 distances and >= 3 p values")
    rows = E.run_campaign(cfg, progress=lambda r: click.echo(
        f"{r['family']} d={r['d']} p={r['p']:.4f}: P_L={r['p_l']:.5f}"))
    outdir = _output_dir(None)
    csv_path = out or os.path.join(outdir, "sweep.csv")
    E.write_csv(rows, csv_path)
    crossings = E.estimate_crossings(rows)
    cross_path = csv_path.rsplit(".", 1)[0] + "_crossings.json"
    with open(cross_path, "w") as fh:
        json.dump(crossings, fh, indent=2)
    click.echo(json.dumps(crossings, indent=2))
    click.echo(f"wrote {csv_path} and {cross_path}")


@main.command("plot-data")
@click.option("--csv", "csv_path", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), default=None)
def plot_data(csv_path, out):
    """Bundle a results CSV plus crossing estimates as JSON for plotting."""
    rows = E.read_csv(csv_path)
    payload = {
        "rows": rows,
        "crossings": E.estimate_crossings(rows),
    }
    text = json.dumps(payload, indent=1)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
        click.echo(f"wrote {out}")
    else:
        click.echo(text)


@main.command()
@click.option("--fast", is_flag=True, help="skip the slower hook sweeps")
def verify(fast):
    """Run the analytic property suites; nonzero exit on any failure."""
    failures = []

    def check(name, ok):
        click.echo(f"{'PASS' if ok else 'FAIL'}  {name}")
        if not ok:
            failures.append(name)

    # Spin-pair conversion table: totality and class multiplicities.
    from stqec import paulis as P
    counts = {}
    for a in "IXYZ":
        for b in "IXYZ":
            counts.setdefault(P.st_from_spins(a, b).kind, []).append((a, b))
    ok = sorted(counts) == ["I", "L", "X", "Y", "Z"] \
        and len(counts["L"]) == 8 \
        and all(len(counts[k]) == 2 for k in "IXYZ") \
        and P.st_from_spins("Z", "I").kind == "Z" \
        and P.st_from_spins("X", "Y").kind == "Y"
    check("spin-pair conversion table has the exact class structure", ok)

    # Gadget algebra on random computational and leaked inputs.
    rng = np.random.default_rng(7)
    gad = CC.build_leakage_gadget()
    ops = gad.compiled()
    ok = True
    for _ in range(20):
        amps = rng.normal(size=2) + 1j * rng.normal(size=2)
        amps /= np.linalg.norm(amps)
        zero, one = C.basis_state(2, 0b01), C.basis_state(2, 0b10)
        psi = C.product_state([amps[0] * zero + amps[1] * one, C.SINGLET])
        out = C.run_ops(psi, ops, 4)
        proj = C.apply_unitary(out, np.outer(C.SINGLET, C.SINGLET.conj()),
                               (0, 1), 4)
        p_s = float(np.vdot(proj, proj).real)
        target = C.product_state([C.SINGLET, amps[1] * zero + amps[0] * one])
        fid = abs(np.vdot(target, proj / np.sqrt(p_s)))
        ok &= p_s > 1 - 1e-10 and fid > 1 - 1e-10
    check("gadget transfers computational states (outcome S, output X|psi>)", ok)

    ok = True
    for _ in range(20):
        amps = rng.normal(size=2) + 1j * rng.normal(size=2)
        amps /= np.linalg.norm(amps)
        psi = C.product_state([amps[0] * C.UP_UP + amps[1] * C.DOWN_DOWN,
                               C.SINGLET])
        out = C.run_ops(psi, ops, 4)
        p_even = 0.0
        for comp in (C.UP_UP, C.DOWN_DOWN):
            proj = C.apply_unitary(out, np.outer(comp, comp.conj()), (0, 1), 4)
            p_even += float(np.vdot(proj, proj).real)
        ok &= abs(p_even - 1.0) < 1e-10
    check("gadget flags leaked inputs (outcome T+-, projection back)", ok)

    # Fidelity formulas per family.
    ok = True
    for fam in G.FAMILIES:
        for fbar in (0.999, 0.994):
            sigma = G.calibrate_sigma(fam, fbar)
            ok &= abs(G.numeric_fbar(fam, sigma) - fbar) / fbar < 1e-3
    check("analytic fidelity calibrations match quadrature", ok)

    # CJ / twirl identities.
    ok = True
    for theta in (0.1, 0.5, 1.0):
        rz = np.diag([np.exp(-1j * theta / 2), np.exp(1j * theta / 2)])
        tab = C.pauli_twirl([C.KrausBranch("S", [rz], 1.0)], np.eye(2))
        ok &= abs(tab.probability("I", "S") - np.cos(theta / 2) ** 2) < 1e-9
        ok &= abs(tab.probability("Z", "S") - np.sin(theta / 2) ** 2) < 1e-9
    check("coherent Z rotations twirl to the dephasing channel", ok)

    # Frame rules against the statevector oracle (sampled if fast).
    mismatches = 0
    for name, build in CC.LIBRARY.items():
        circ = build()
        sets = CC.oracle_input_sets(circ)[:1 if fast else None]
        for ics in sets:
            points = CC.fault_points(circ)
            if fast:
                points = points[::5]
            for gf in points:
                br = CC.simulate_frames(circ, ics, gate_fault=gf)
                for proto in ("a", "b"):
                    fd = CC.frame_distribution(br, circ, proto)
                    sd = CC.statevector_distribution(circ, ics, gate_fault=gf,
                                                     protocol=proto)
                    if not CC.distributions_match(fd, sd):
                        mismatches += 1
    check(f"frame rules match the statevector oracle ({mismatches} mismatches)",
          mismatches == 0)

    # Hook errors.
    ok = True
    for name in ("css_x_stabiliser", "css_z_stabiliser", "xzzx_stabiliser",
                 "leakage_gadget"):
        rep = CC.enumerate_hook_errors(CC.LIBRARY[name]())
        for entry in rep:
            for br in entry["branches"]:
                ok &= not br["distance_reducing"]
    check("no single fault produces a distance-reducing hook error", ok)

    if failures:
        raise SystemExit(1)


if __name__ == "__main__":
    main()
