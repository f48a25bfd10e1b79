"""`shell` command-line front end.

Exit codes: 0 ok, 2 config or geometry invalid, 3 thickness not admissible,
4 state I/O failure, 5 output failure, 10 verification failure.
"""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np
from scipy import stats
from threadpoolctl import threadpool_limits

from . import config as cfgmod
from .assemble import (LoadSpec, OptimizerMemory, ShellModel, SolverOptions, limit_energy,
                       minimize)
from .grid import grid_geometry
from .config import ConfigError
from .io import (OutputError, StateIOError, read_log, read_state, write_log, write_state,
                 write_table, write_vtk)
from .linshell import identify_6param, reissner_mindlin_check
from .presets import initial_state, load_field
from .reconstruct import gamma_gap
from .rotalg import frob2, skew, sym, trace
from .shellcore import curvature_weights, hom_form, membrane_weights, normal_row
from .surface import DegenerateSurface, frame_at, sample_grid, thickness_admissible

EXIT_OK, EXIT_CONFIG, EXIT_ADMISSIBLE, EXIT_STATE, EXIT_OUTPUT, EXIT_VERIFY = 0, 2, 3, 4, 5, 10


class CliExit(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _out_dir(args, cfg):
    d = Path(args.out if args.out else (cfg.output.dir if cfg else "out"))
    try:
        d.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory {d}: {exc}") from exc
    return d


def _load_config(args, required=True):
    if args.config is None:
        if required:
            raise ConfigError("--config is required for this command")
        return None
    return cfgmod.load(args.config)


def _patch(cfg):
    try:
        return cfg.build_patch()
    except DegenerateSurface as exc:
        raise ConfigError(f"degenerate surface: {exc}") from exc


def _admissible_or_exit(patch, cfg, h):
    n = cfg.grid.admissibility_samples
    if not thickness_admissible(patch, h, (n, n)):
        raise CliExit(EXIT_ADMISSIBLE, f"thickness h={h} violates h max|kappa| < 2")


def _loads(cfg, grid):
    L = cfg.loads
    return LoadSpec(N0=load_field(L.N0, grid, (3,)), M1=load_field(L.M1, grid, (3,)),
                    C0=load_field(L.C0, grid, (3, 3)), C1=load_field(L.C1, grid, (3, 3)),
                    gamma1=tuple(L.gamma1), include_h2=L.include_h2)


def _setup(cfg):
    patch = _patch(cfg)
    _admissible_or_exit(patch, cfg, cfg.h)
    grid = cfg.build_grid()
    mat = cfg.build_material()
    model = ShellModel(grid, patch, mat, _loads(cfg, grid), cfg.h, cfg.prefactor)
    return patch, grid, mat, model


def _state(args, cfg, grid, patch):
    if getattr(args, "state", None):
        return read_state(args.state, grid)
    i = cfg.initial
    return initial_state(i.kind, grid, patch, i.amplitude, i.seed)


# ---------------------------------------------------------------------------
# commands

def cmd_geometry(args):
    cfg = _load_config(args)
    patch = _patch(cfg)
    X1, X2 = sample_grid(patch, cfg.grid.n1, cfg.grid.n2)
    try:
        fr = frame_at(patch, X1, X2)
    except DegenerateSurface as exc:
        raise ConfigError(f"degenerate surface: {exc}") from exc
    rows = [(float(a), float(b), float(H), float(K), float(k[0]), float(k[1]), float(g))
            for a, b, H, K, k, g in zip(X1.ravel(), X2.ravel(), fr.H.ravel(), fr.K.ravel(),
                                        fr.kappa.reshape(-1, 2), fr.det_g.ravel())]
    out = _out_dir(args, cfg)
    write_table(out / "geometry.csv", ("x1", "x2", "H", "K", "kappa1", "kappa2", "det_g"), rows)
    n = cfg.grid.admissibility_samples
    ok = thickness_admissible(patch, cfg.h, (n, n))
    kmax = float(np.max(np.abs(fr.kappa)))
    print(f"patch={patch.kind} samples={len(rows)} max|kappa|={kmax:.6g} "
          f"h={cfg.h:g} admissible={str(ok).lower()}")
    if not ok:
        raise CliExit(EXIT_ADMISSIBLE, "thickness not admissible")
    return EXIT_OK


def _golden_path(args, cfg):
    if args.golden:
        return Path(args.golden)
    if cfg.output.golden:
        p = Path(cfg.output.golden)
        return p if p.is_absolute() else Path(args.config).parent / p
    return None


def cmd_energy(args):
    cfg = _load_config(args)
    patch, grid, _, model = _setup(cfg)
    state = _state(args, cfg, grid, patch)
    eb = model.evaluate(state)
    d = eb.as_dict()
    print(" ".join(f"{k}={v!r}" for k, v in d.items()))
    out = _out_dir(args, cfg)
    write_table(out / "energy.csv", tuple(d), [tuple(float(v) for v in d.values())])
    golden = _golden_path(args, cfg)
    if golden is None:
        return EXIT_OK
    if args.bless:
        try:
            golden.write_text(json.dumps({k: float(v) for k, v in d.items()}, indent=2) + "\n")
        except OSError as exc:
            raise OutputError(f"cannot write golden file {golden}: {exc}") from exc
        print(f"blessed {golden}")
        return EXIT_OK
    if not golden.exists():
        print(f"golden file {golden} missing; rerun with --bless", file=sys.stderr)
        return EXIT_VERIFY
    ref = json.loads(golden.read_text())
    bad = [k for k, v in d.items() if abs(v - ref[k]) > 1e-12 * max(1.0, abs(ref[k]))]
    if bad:
        print(f"golden mismatch in {', '.join(bad)}", file=sys.stderr)
        return EXIT_VERIFY
    print("golden: match")
    return EXIT_OK


def cmd_minimize(args):
    cfg = _load_config(args)
    patch, grid, _, model = _setup(cfg)
    out = _out_dir(args, cfg)
    ck_state, ck_mem, ck_log = out / "checkpoint.state", out / "checkpoint.opt.npz", \
        out / "checkpoint.csv"
    prior = []
    if args.resume:
        state = read_state(ck_state, grid)
        try:
            mem = OptimizerMemory.load(ck_mem)
            prior = read_log(ck_log)
        except (OSError, ValueError, KeyError) as exc:
            raise StateIOError(f"cannot read checkpoint sidecars: {exc}") from exc
    else:
        state = _state(args, cfg, grid, patch)
        mem = OptimizerMemory()
    s = cfg.solver
    opts = SolverOptions(max_iter=s.max_iter, tol=s.tol, step_rule=s.step_rule, memory=s.memory,
                         checkpoint_every=s.checkpoint_every)

    def joined(log):
        return prior + log[1:] if prior else log

    def checkpoint(it, st, log, m):
        if opts.checkpoint_every and it % opts.checkpoint_every == 0:
            write_state(ck_state, st)
            m.save(ck_mem)
            write_log(ck_log, joined(log))

    t0 = time.perf_counter()
    state, log, mem = minimize(model, state, opts, mem, callback=checkpoint)
    full = joined(log)
    write_state(out / "final.state", state)
    write_log(out / "iterations.csv", full)
    last = full[-1]
    print(f"iterations={mem.iteration} total={last['total']!r} "
          f"grad_inf={last['grad_inf_norm']:.3e} time={time.perf_counter() - t0:.2f}s")
    return EXIT_OK


def cmd_gamma_sweep(args):
    cfg = _load_config(args)
    patch = _patch(cfg)
    for h in cfg.sweep.h:
        _admissible_or_exit(patch, cfg, h)
    grid = cfg.build_grid()
    mat = cfg.build_material()
    geom = grid_geometry(patch, grid)
    if args.state:
        state = read_state(args.state, grid)
    else:
        state = initial_state("smooth", grid, patch, cfg.sweep.amplitude)
    j0 = limit_energy(state, grid, geom, mat)
    rows = []
    for h in sorted(cfg.sweep.h, reverse=True):
        gap = gamma_gap(h, state, grid, geom, mat, cfg.sweep.n3, j0=j0)
        rows.append((float(h), float(gap + j0), float(j0), float(gap)))
        print(f"h={h:g} scaled3d={gap + j0!r} J0={j0!r} gap={gap:.6e}")
    out = _out_dir(args, cfg)
    write_table(out / "gamma_sweep.csv", ("h", "scaled_3d_energy", "J0", "gap"), rows)
    slope, lo, hi = gap_slope([r[0] for r in rows], [r[3] for r in rows])
    print(f"slope={slope:.4f} ci95=[{lo:.4f}, {hi:.4f}]")
    return EXIT_OK


def gap_slope(hs, gaps):
    """Least-squares slope of log|gap| against log h with a 95% interval.

    Gaps at round-off level (flat identity) have no meaningful slope: nan.
    """
    hs, gaps = np.asarray(hs, float), np.abs(np.asarray(gaps, float))
    if len(hs) < 3 or np.any(gaps <= 1e-14):
        return float("nan"), float("nan"), float("nan")
    r = stats.linregress(np.log(hs), np.log(gaps))
    half = stats.t.ppf(0.975, len(hs) - 2) * r.stderr
    return float(r.slope), float(r.slope - half), float(r.slope + half)


def cmd_verify(args):
    from .verification import DEFAULT_MATERIAL, run_suite
    cfg = _load_config(args, required=False)
    mat = cfg.build_material() if cfg else DEFAULT_MATERIAL
    t0 = time.perf_counter()
    results = run_suite(mat, samples=args.samples)
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed "
          f"in {time.perf_counter() - t0:.1f}s")
    return EXIT_VERIFY if failed else EXIT_OK


def nodal_fields(model, state):
    """Point data for export; energy_density * weights sums to membrane + curvature."""
    fr = model.frame
    kin = model.kinematics(state.m_flat, state.Q_flat)
    E, K = kin["E"], kin["K"]
    wm = hom_form(E, fr, membrane_weights(model.mat))
    wc = hom_form(K, fr, curvature_weights(model.mat))
    Ep = fr.A @ E
    scalars = {
        "tr_E": trace(Ep),
        "sym_E_norm": np.sqrt(frob2(sym(Ep))),
        "skew_E_norm": np.sqrt(frob2(skew(Ep))),
        "shear_norm": np.linalg.norm(normal_row(E, fr), axis=-1),
        "K_norm": np.sqrt(frob2(K)),
        "energy_density": model.prefactor * fr.det_g * (wm + wc),
    }
    Q = state.Q_flat
    vectors = {f"R{j + 1}": Q[:, :, j] for j in range(3)}
    return scalars, vectors


def cmd_export(args):
    cfg = _load_config(args)
    patch, grid, _, model = _setup(cfg)
    state = _state(args, cfg, grid, patch)
    scalars, vectors = nodal_fields(model, state)
    path = Path(args.out) / "shell.vtk" if args.out else Path(cfg.output.dir) / "shell.vtk"
    if path.parent and not path.parent.exists():
        try:
            path.parent.mkdir(parents=True)
        except OSError as exc:
            raise OutputError(f"cannot create {path.parent}: {exc}") from exc
    write_vtk(path, state, scalars, vectors)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_compare(args):
    cfg = _load_config(args, required=False)
    from .verification import DEFAULT_MATERIAL
    mat = cfg.build_material() if cfg else DEFAULT_MATERIAL
    h = cfg.h if cfg else 0.1
    co = identify_6param(mat, h)
    print("6-parameter coefficients:")
    for k, v in vars(co).items():
        print(f"  {k:11s} {v: .12g}")
    print("reference plate comparison (term, ours, reference, match):")
    for name, ours, ref, ok in reissner_mindlin_check(mat, h):
        print(f"  {name:50s} {ours: .8g} {ref: .8g} {ok}")
    return EXIT_OK


COMMANDS = {"geometry": cmd_geometry, "energy": cmd_energy, "minimize": cmd_minimize,
            "gamma-sweep": cmd_gamma_sweep, "verify": cmd_verify, "export": cmd_export,
            "compare": cmd_compare}


def build_parser():
    p = argparse.ArgumentParser(prog="shell", description="Cosserat membrane shell tools")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="TOML run configuration")
    p.add_argument("--state", help="state file (n1 n2 header, 12 values per node)")
    p.add_argument("--out", help="output directory (default: [output].dir)")
    p.add_argument("--threads", type=int, default=None,
                   help="BLAS thread limit; 1 gives bit-exact reproducibility")
    p.add_argument("--bless", action="store_true", help="rewrite the energy golden file")
    p.add_argument("--golden", help="golden file path (overrides [output].golden)")
    p.add_argument("--resume", action="store_true", help="continue minimize from checkpoint")
    p.add_argument("--samples", type=int, default=20, help="random samples per verify check")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with threadpool_limits(limits=args.threads):
            return COMMANDS[args.command](args)
    except CliExit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StateIOError as exc:
        print(f"state error: {exc}", file=sys.stderr)
        return EXIT_STATE
    except OutputError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_OUTPUT


if __name__ == "__main__":
    sys.exit(main())
