"""Command-line drivers: single runs, convergence sweeps, HIT campaigns and post-processing.

    fvbench run|convergence|hit-campaign|spectrum|compare --config FILE [--set key=value ...]
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import analysis as an
from . import cases
from . import io as fio
from .config import ConfigError, RunConfig, load, parse_scheme
from .core import EULER, ConservedField, GasModel, StateError, TransportCoeffs
from .integrator import GAUSS2, SchemeConfig, StepStats, advance_to_time
from .reconstruct import set_threads

log = logging.getLogger("fvbench")


@dataclass
class RunResult:
    config: RunConfig
    initial: ConservedField
    final: ConservedField
    stats: list[StepStats]
    gas: GasModel
    coeffs: TransportCoeffs
    tau: float
    series: an.TurbulenceSeries = field(default_factory=an.TurbulenceSeries)
    wall_time: float = 0.0

    @property
    def drift(self) -> np.ndarray:
        return an.conservation_drift(self.initial, self.final)

    @property
    def riemann_solves(self) -> int:
        return sum(s.riemann_solves for s in self.stats)

    @property
    def reconstruction_calls(self) -> int:
        return sum(s.reconstruction_calls for s in self.stats)

    def summary(self) -> str:
        d = self.drift
        return (f"{self.config.case} nx={self.config.nx} {self.config.scheme.label}: t={self.final.time:.9g} "
                f"steps={len(self.stats)} drift(mass,mom,energy)=({d[0]:.3e},{d[1:-1].max():.3e},{d[-1]:.3e}) "
                f"wall={self.wall_time:.2f}s riemann_solves={self.riemann_solves}")


def initial_field(cfg: RunConfig, nx: int, scheme: SchemeConfig) -> tuple[ConservedField, GasModel, TransportCoeffs, float]:
    """Initial field, gas, transport and time scale (tau for HIT, 1 otherwise)."""
    p = cfg.params
    if cfg.case == "vortex":
        gas = GasModel()
        f = cases.init_vortex(cases.vortex_grid(nx, p), p, gas, quadrature=scheme.face_quadrature == GAUSS2)
        return f, gas, EULER, 1.0
    if cfg.case == "shu-osher":
        gas = GasModel()
        return cases.init_shu_osher(cases.shu_osher_grid(nx, p), p, gas), gas, EULER, 1.0
    gas = p.gas()
    f, coeffs, tau = cases.init_hit(cases.hit_grid(nx), p, gas)
    return f, gas, coeffs, tau


def _time_label(cfg: RunConfig, t: float, tau: float) -> str:
    return f"{t / tau:.6g}" if cfg.case == "hit" else f"{t:.6g}"


def run_case(cfg: RunConfig, nx: int | None = None, scheme: SchemeConfig | None = None,
             out_dir: Path | None = None, outputs: Sequence[str] | None = None) -> RunResult:
    """Run one configuration; artifacts go to ``out_dir`` when given."""
    nx = nx or cfg.nx
    scheme = scheme or cfg.scheme
    cfg = cfg.with_scheme(scheme, nx)
    outputs = cfg.outputs if outputs is None else outputs
    f0, gas, coeffs, tau = initial_field(cfg, nx, scheme)
    series = an.TurbulenceSeries()
    is_cube = f0.grid.ndim == 3 and len(set(f0.grid.cells)) == 1

    def sample(f: ConservedField) -> None:
        ens = an.enstrophy(f) if is_cube else float("nan")
        drift = float(an.conservation_drift(f0, f)[0])
        t = f.time / tau
        if series.times and t <= series.times[-1]:
            return
        series.append(t, an.kinetic_energy(f), ens, drift)
        log.info("t=%.6g ke=%.6g enstrophy=%.6g", f.time, series.kinetic_energy[-1], ens)

    interval = cfg.series_interval * (tau if cfg.case == "hit" else 1.0)
    tic = time.perf_counter()
    final, stats = advance_to_time(f0.copy(), cfg.t_end, scheme, gas, coeffs, cfg.cfl,
                                   callbacks=[sample] if "series" in outputs else [],
                                   sample_interval=interval if interval > 0 else None)
    res = RunResult(cfg, f0, final, stats, gas, coeffs, tau, series, time.perf_counter() - tic)
    if out_dir is not None:
        write_run_artifacts(res, Path(out_dir), outputs)
    return res


def write_run_artifacts(res: RunResult, out: Path, outputs: Sequence[str]) -> None:
    cfg = res.config
    header = cfg.resolved()
    header["config_digest"] = cfg.digest()
    label = _time_label(cfg, res.final.time, res.tau)
    if "series" in outputs:
        rows = [(t * res.tau, t, ke, en, dr) for t, ke, en, dr in
                zip(res.series.times, res.series.kinetic_energy, res.series.enstrophy, res.series.mass_drift)]
        fio.write_csv(out / "series.csv", ["t", "t_over_tau", "ke", "enstrophy", "mass_drift"], rows, header)
    if "spectrum" in outputs and res.final.grid.ndim == 3:
        spec = an.shell_spectrum(an.vorticity_spectral(res.final))
        fio.write_csv(out / f"spectrum_{label}.csv", ["k", "E"], zip(spec.shells, spec.values), header)
    if "snapshot" in outputs:
        fio.write_snapshot(out / f"snap_{label}.fvb", res.final, res.gas,
                           {"config_digest": cfg.digest(), "scheme": cfg.scheme.label})
    if "report" in outputs:
        d = res.drift
        steps = max(len(res.stats), 1)
        fio.write_csv(out / "report.csv",
                      ["t_final", "steps", "mass_drift", "momentum_drift", "energy_drift",
                       "riemann_solves", "reconstruction_calls_per_step"],
                      [(res.final.time, len(res.stats), d[0], d[1:-1].max(), d[-1],
                        res.riemann_solves, res.reconstruction_calls / steps)], header)


# ---------------------------------------------------------------------------
# convergence


def reference_field(cfg: RunConfig, out: Path) -> ConservedField:
    """Fine reference run, cached as a snapshot keyed by its configuration."""
    ref_cfg = cfg.with_scheme(cfg.reference_scheme, cfg.reference_nx)
    path = out / f"reference_{cfg.reference_nx}_{ref_cfg.digest()}.fvb"
    if path.exists():
        f, _, header = fio.read_snapshot(path)
        if header.get("meta.config_digest") == ref_cfg.digest():
            log.info("reusing reference %s", path)
            return f
    log.info("computing reference nx=%d %s", cfg.reference_nx, cfg.reference_scheme.label)
    res = run_case(ref_cfg, outputs=())
    fio.write_snapshot(path, res.final, res.gas, {"config_digest": ref_cfg.digest(),
                                                  "scheme": ref_cfg.scheme.label})
    return res.final


def error_metric(cfg: RunConfig, res: RunResult, reference: ConservedField | None) -> float:
    """Vortex: L1 of x-velocity against the initial field; otherwise against the restricted reference."""
    if cfg.case == "vortex":
        u = res.final.interior
        u0 = res.initial.interior
        return an.l1_error(u[1] / u[0], u0[1] / u0[0])
    assert reference is not None
    factor = reference.grid.cells[0] // res.final.grid.cells[0]
    if reference.grid.cells[0] != factor * res.final.grid.cells[0]:
        raise ConfigError(f"reference nx={reference.grid.cells[0]} is not a multiple of {res.final.grid.cells[0]}")
    nd = res.final.grid.ndim
    if cfg.case == "shu-osher":
        return an.l1_error(res.final.interior[0], an.coarsen_average(reference.interior[0], factor, nd))
    uref = reference.interior
    ref_vel = an.coarsen_average(uref[1:-1] / uref[0], factor, nd)
    vel = res.final.interior[1:-1] / res.final.interior[0]
    # summed over velocity components
    return float(np.mean(np.sum(np.abs(vel - ref_vel), axis=0)))


def convergence(cfg: RunConfig, schemes: Sequence[SchemeConfig], out: Path | None = None,
                echo=print) -> dict[str, tuple[an.ConvergenceReport, list[RunResult]]]:
    if cfg.case != "vortex":
        if not cfg.reference_nx:
            raise ConfigError("reference.nx is required for this case")
        if cfg.reference_nx < 4 * max(cfg.resolutions):
            raise ConfigError("reference.nx must be at least 4x the finest resolution")
    ref = reference_field(cfg, out or Path(cfg.output_dir)) if cfg.case != "vortex" else None
    results = {}
    for scheme in schemes:
        samples, runs = [], []
        for n in cfg.resolutions:
            res = run_case(cfg, n, scheme, outputs=())
            err = error_metric(cfg, res, ref)
            samples.append((n, err))
            runs.append(res)
            echo(f"{scheme.label} N={n} error={err:.6e} max_drift={res.drift.max():.3e} "
                 f"steps={len(res.stats)} wall={res.wall_time:.1f}s")
        rep = an.ConvergenceReport(samples, label=scheme.label)
        echo(f"{scheme.label}: fitted order {rep.fitted_order:.3f} (residual {rep.fit_residual:.3f})")
        results[scheme.label] = (rep, runs)
    if out is not None:
        rows = []
        for label, (rep, runs) in results.items():
            for (n, e), r in zip(rep.samples, runs):
                rows.append((label, n, e, rep.fitted_order, rep.fit_residual, float(r.drift.max())))
        header = cfg.resolved()
        header["schemes"] = ",".join(results)
        fio.write_csv(out / "report.csv", ["scheme", "N", "error", "fitted_order", "fit_residual", "max_drift"],
                      rows, header)
    return results


# ---------------------------------------------------------------------------
# HIT campaign


def hit_campaign(cfg: RunConfig, schemes: Sequence[SchemeConfig], out: Path | None = None,
                 echo=print) -> dict[tuple[int, str], RunResult]:
    if cfg.case != "hit":
        raise ConfigError("hit-campaign needs case=hit")
    runs: dict[tuple[int, str], RunResult] = {}
    for n in cfg.resolutions:
        for scheme in schemes:
            sub = out / f"N{n}_{scheme.label.replace('/', '_')}" if out else None
            res = run_case(cfg, n, scheme, sub, ("series", "spectrum", "snapshot"))
            runs[(n, scheme.label)] = res
            echo(res.summary())
    if out is not None:
        ref_label = cfg.reference_label or schemes[-1].label
        nref = max(cfg.resolutions)
        ref = runs.get((nref, ref_label))
        rows = []
        for label in [s.label for s in schemes]:
            samples = []
            for n in cfg.resolutions:
                r = runs[(n, label)]
                err = float("nan")
                if ref is not None and n < nref:
                    err = error_metric(cfg, r, ref.final)
                    samples.append((n, err))
                steps = max(len(r.stats), 1)
                rows.append([label, n, r.series.kinetic_energy[-1], r.series.enstrophy[-1],
                             r.reconstruction_calls / steps, r.riemann_solves / steps, err])
            order = an.ConvergenceReport(samples).fitted_order if len(samples) >= 2 else float("nan")
            for row in rows[-len(cfg.resolutions):]:
                row.append(order)
        header = cfg.resolved()
        header["reference"] = f"{ref_label}@{nref}"
        fio.write_csv(out / "report.csv", ["scheme", "N", "ke_final", "enstrophy_final",
                                           "reconstruction_calls_per_step", "riemann_solves_per_step",
                                           "error_vs_reference", "fitted_order"], rows, header)
    return runs


# ---------------------------------------------------------------------------
# commands


def _schemes(cfg: RunConfig) -> list[SchemeConfig]:
    if "schemes" in cfg.raw:
        return [parse_scheme(s, cfg.scheme) for s in cfg.schemes]
    return [cfg.scheme]


def cmd_run(cfg: RunConfig) -> int:
    out = Path(cfg.output_dir)
    res = run_case(cfg, out_dir=out)
    print(res.summary())
    return 0


def cmd_convergence(cfg: RunConfig) -> int:
    convergence(cfg, _schemes(cfg), Path(cfg.output_dir))
    return 0


def cmd_hit_campaign(cfg: RunConfig) -> int:
    schemes = [parse_scheme(s, cfg.scheme) for s in cfg.schemes]
    hit_campaign(cfg, schemes, Path(cfg.output_dir))
    return 0


def cmd_spectrum(cfg: RunConfig) -> int:
    if not cfg.input:
        raise ConfigError("input: snapshot path required")
    f, gas, header = fio.read_snapshot(cfg.input)
    spec = an.shell_spectrum(an.vorticity_spectral(f))
    meta = dict(header)
    meta["source"] = cfg.input
    path = fio.write_csv(Path(cfg.output_dir) / f"spectrum_{Path(cfg.input).stem}.csv", ["k", "E"],
                         zip(spec.shells, spec.values), meta)
    print(f"wrote {path} ({len(spec.shells)} shells)")
    return 0


def cmd_compare(cfg: RunConfig) -> int:
    if not cfg.input or not cfg.other:
        raise ConfigError("input and other: two snapshot paths required")
    a, gas, _ = fio.read_snapshot(cfg.input)
    b, _, _ = fio.read_snapshot(cfg.other)
    if a.grid.cells[0] > b.grid.cells[0]:
        a, b = b, a
    factor = b.grid.cells[0] // a.grid.cells[0]
    if any(nb != factor * na for na, nb in zip(a.grid.cells, b.grid.cells)):
        raise ConfigError("grids are not integer refinements of each other")
    wa = a.primitive(gas)
    wb = an.coarsen_average(b.primitive(gas), factor, b.grid.ndim)
    names = ["rho"] + [f"u{d}" for d in range(a.grid.ndim)] + ["p"]
    rows = [(name, an.l1_error(x, y)) for name, x, y in zip(names, wa, wb)]
    for name, e in rows:
        print(f"L1({name}) = {e:.9e}")
    fio.write_csv(Path(cfg.output_dir) / "compare.csv", ["variable", "l1"], rows,
                  {"a": cfg.input, "b": cfg.other, "factor": str(factor)})
    return 0


COMMANDS = {
    "run": cmd_run,
    "convergence": cmd_convergence,
    "hit-campaign": cmd_hit_campaign,
    "spectrum": cmd_spectrum,
    "compare": cmd_compare,
}


def main(argv: Sequence[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="fvbench", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="key=value configuration file")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a setting")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    threads = os.environ.get("FVBENCH_THREADS")
    if threads:
        set_threads(int(threads))
    try:
        cfg = load(args.config, args.set)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"fvbench: configuration error: {exc}", file=sys.stderr)
        return 2
    except StateError as exc:
        print(f"fvbench: solver failure: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"fvbench: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
