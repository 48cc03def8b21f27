"""Command-line front end: config parsing, orchestration, and all file I/O.

Subcommands: cov, sim, nfbm, tangent, verify, check-model.  Configs are
versioned JSON documents; every output file records the sha256 hash of the
resolved config so artifacts from different runs cannot be silently mixed.
Outputs are byte-identical across reruns and worker counts: thread count and
wall-clock times never enter a file (runtimes go to the console only).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .covariance import (IntegerTwoH, K_quadrature, NotAnnihilating,
                         cond_psd_check, cross_covariance, K_closed_form,
                         reversibility_gap)
from .linops import admissibility
from .measures import (FiniteMeasure, build_frame, lambda_t, monomial_basis,
                       convolve_reflect)
from .simulate import (NotHermitian, StationaryConfig, model_hash, sample_irfk,
                       sample_nfbm, resolve_threads)
from .spectral import Inadmissible, SelfSimilarModel, trace_integrability
from .verify import (check_holder_scaling, check_intrinsic_stationarity,
                     check_mc_covariance, check_self_similarity,
                     check_tangent_convergence)


class ConfigError(Exception):
    """Configuration problem; the message starts with the offending field path."""


class IoError(Exception):
    """Filesystem problem wrapped with the path that caused it."""


def fmt(x):
    """17-significant-digit decimal, round-trip exact for binary64."""
    return f"{float(x):.17g}"


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(resolved):
    return hashlib.sha256(canonical_json(resolved).encode()).hexdigest()


# ---------------------------------------------------------------------------
# config loading

def _load_json(path, what):
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise IoError(f"{path}: {e.strerror or e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"{what}: not valid JSON ({e})") from e


def _field(cfg, path, default=None, required=False):
    node = cfg
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            if required:
                raise ConfigError(f"{path}: missing required field")
            return default
        node = node[part]
    return node


def load_config(path, overrides):
    """Parse, apply CLI overrides, validate; returns (resolved, hash, out dir).

    The resolved dict is what gets hashed: overrides for seed, replicates and
    quadrature resolution are data-level and belong in the hash; the output
    directory and thread count are not data and stay out of it.
    """
    cfg = _load_json(path, "config")
    if not isinstance(cfg, dict):
        raise ConfigError("config: top level must be an object")
    schema = cfg.get("schema", 1)
    if schema != 1:
        raise ConfigError(f"schema: unsupported version {schema!r}")
    out_dir = cfg.get("out", "out")
    resolved = {k: v for k, v in cfg.items() if k != "out"}
    if overrides.seed is not None:
        resolved["seed"] = int(overrides.seed)
    if overrides.replicates is not None:
        resolved["replicates"] = int(overrides.replicates)
    if overrides.quad_q is not None:
        model = resolved.get("model")
        if isinstance(model, dict):
            quad = dict(model.get("quad", {}))
            quad["Q"] = int(overrides.quad_q)
            resolved = dict(resolved)
            resolved["model"] = dict(model)
            resolved["model"]["quad"] = quad
        stat = resolved.get("stationary")
        if isinstance(stat, dict):
            quad = dict(stat.get("quad", {}))
            quad["Q"] = int(overrides.quad_q)
            resolved["stationary"] = dict(stat)
            resolved["stationary"]["quad"] = quad
    return resolved, config_hash(resolved), out_dir


def build_model(resolved):
    data = _field(resolved, "model", required=True)
    try:
        return SelfSimilarModel.from_dict(data)
    except (KeyError, TypeError) as e:
        raise ConfigError(f"model: malformed ({e})") from e
    except Inadmissible:
        raise
    except ValueError as e:
        raise ConfigError(f"model: {e}") from e


def build_frame_from(resolved, model):
    spec = _field(resolved, "frame", default={"auto": True, "seed": 0})
    basis = monomial_basis(model.d, model.k)
    try:
        if "nodes" in spec:
            return build_frame(basis, nodes=spec["nodes"])
        return build_frame(basis, seed=int(spec.get("seed", 0)))
    except Exception as e:
        raise ConfigError(f"frame: {e}") from e


def build_grid(resolved, d):
    spec = _field(resolved, "grid", required=True)
    if "points" in spec:
        pts = np.asarray(spec["points"], dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.shape[1] != d:
            raise ConfigError(f"grid.points: dimension {pts.shape[1]} != d = {d}")
        return pts
    if "lattice" in spec:
        lat = spec["lattice"]
        try:
            lo = np.asarray(lat["min"], dtype=float).reshape(d)
            hi = np.asarray(lat["max"], dtype=float).reshape(d)
            shape = [int(n) for n in np.asarray(lat["shape"]).reshape(d)]
        except (KeyError, ValueError) as e:
            raise ConfigError(f"grid.lattice: {e}") from e
        axes = [np.linspace(lo[i], hi[i], shape[i]) for i in range(d)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)
    raise ConfigError("grid: need either 'points' or 'lattice'")


def load_probes(resolved, probe_path, d):
    if probe_path is not None:
        data = _load_json(probe_path, "probes")
        entries = data["probes"] if isinstance(data, dict) else data
    else:
        entries = _field(resolved, "probes", required=True)
    probes = []
    for i, entry in enumerate(entries):
        try:
            mu = FiniteMeasure.from_dict(entry)
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"probes[{i}]: malformed ({e})") from e
        if mu.dim != d:
            raise ConfigError(f"probes[{i}]: dimension {mu.dim} != d = {d}")
        probes.append(mu)
    if not probes:
        raise ConfigError("probes: empty list")
    return probes


# ---------------------------------------------------------------------------
# output writers

def _out_dir(args, resolved_path="out"):
    out = Path(args.out) if args.out else Path(resolved_path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise IoError(f"{out}: {e.strerror or e}") from e
    return out


def _write_text(path, text):
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise IoError(f"{path}: {e.strerror or e}") from e


def _json_default(o):
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    raise TypeError(f"not JSON-serializable: {type(o).__name__}")


def _write_json(path, obj):
    _write_text(path, json.dumps(obj, sort_keys=True, indent=2,
                                 default=_json_default) + "\n")


def _versions():
    import scipy
    return {"irfk": __version__, "numpy": np.__version__,
            "scipy": scipy.__version__}


def _sidecar(cfg_hash, seed, extra=None):
    doc = {"config_hash": cfg_hash, "seed": int(seed), "versions": _versions()}
    if extra:
        doc.update(extra)
    return doc


# ---------------------------------------------------------------------------
# subcommands

def cmd_cov(args):
    resolved, cfg_hash, out_cfg = load_config(args.config, args)
    model = build_model(resolved)
    probes = load_probes(resolved, args.probes, model.d)
    n = len(probes)
    # upper triangle computed, lower filled by conjugate transpose so the
    # emitted blocks are exactly Hermitian-symmetric
    blocks = {}
    errs = {}
    for i in range(n):
        for j in range(i, n):
            try:
                if model.is_scalar:
                    C = K_closed_form(convolve_reflect(probes[i], probes[j]),
                                      model)
                    err = 0.0
                else:
                    qv = K_quadrature(probes[i], probes[j], model)
                    C, err = qv.C, qv.err_est
            except NotAnnihilating as e:
                raise ConfigError(f"probes[{i}] x probes[{j}]: {e}") from e
            blocks[(i, j)] = C
            errs[(i, j)] = err
    method = "closed" if model.is_scalar else "quadrature"
    lines = ["probe_id_i,probe_id_j,row,col,re,im,method,err_est"]
    for i in range(n):
        for j in range(n):
            C = blocks[(i, j)] if i <= j else blocks[(j, i)].conj().T
            err = errs[(i, j)] if i <= j else errs[(j, i)]
            for r in range(model.m):
                for c in range(model.m):
                    lines.append(f"{i},{j},{r},{c},{fmt(C[r, c].real)},"
                                 f"{fmt(C[r, c].imag)},{method},{fmt(err)}")
    out = _out_dir(args, out_cfg)
    _write_text(out / "cov.csv", "\n".join(lines) + "\n")
    _write_json(out / "cov_meta.json",
                _sidecar(cfg_hash, _field(resolved, "seed", default=0),
                         {"model_hash": model_hash(model), "method": method,
                          "n_probes": n, "quad": model.quad.to_dict()}))
    print(f"wrote {out / 'cov.csv'} ({n * n} blocks, method {method})")
    return 0


def _write_sample_csv(path, sample):
    lines = ["replicate,grid_index,component,re,im"]
    vals = sample.values
    complex_vals = np.iscomplexobj(vals)
    for rep in range(vals.shape[0]):
        for g in range(vals.shape[1]):
            for c in range(vals.shape[2]):
                v = vals[rep, g, c]
                re = v.real if complex_vals else v
                im = v.imag if complex_vals else 0.0
                lines.append(f"{rep},{g},{c},{fmt(re)},{fmt(im)}")
    _write_text(path, "\n".join(lines) + "\n")


def cmd_sim(args):
    resolved, cfg_hash, out_cfg = load_config(args.config, args)
    model = build_model(resolved)
    frame = build_frame_from(resolved, model)
    grid = build_grid(resolved, model.d)
    replicates = int(_field(resolved, "replicates", default=100))
    seed = int(_field(resolved, "seed", default=0))
    real_output = bool(_field(resolved, "real_output", default=True))
    sample = sample_irfk(model, frame, grid, replicates, seed,
                         real_output=real_output,
                         threads=resolve_threads(args.threads))
    out = _out_dir(args, out_cfg)
    _write_sample_csv(out / "sim.csv", sample)
    _write_json(out / "sim_meta.json",
                _sidecar(cfg_hash, seed,
                         {"model_hash": model_hash(model),
                          "quad": model.quad.to_dict(),
                          "frame": frame.to_dict(),
                          "replicates": replicates,
                          "grid_points": int(grid.shape[0]),
                          "real_output": real_output}))
    print(f"wrote {out / 'sim.csv'} ({replicates} replicates x "
          f"{grid.shape[0]} points)")
    return 0


def cmd_nfbm(args):
    resolved, cfg_hash, out_cfg = load_config(args.config, args)
    n = int(_field(resolved, "n", default=1))
    H = float(_field(resolved, "H", required=True))
    grid = build_grid(resolved, 1)
    replicates = int(_field(resolved, "replicates", default=100))
    seed = int(_field(resolved, "seed", default=0))
    sample = sample_nfbm(n, H, grid, replicates, seed,
                         threads=resolve_threads(args.threads))
    out = _out_dir(args, out_cfg)
    _write_sample_csv(out / "nfbm.csv", sample)
    _write_json(out / "nfbm_meta.json",
                _sidecar(cfg_hash, seed,
                         {"model_hash": sample.metadata["model_hash"],
                          "n": n, "H": H, "replicates": replicates,
                          "frame": sample.frame.to_dict(),
                          "grid_points": int(grid.shape[0])}))
    print(f"wrote {out / 'nfbm.csv'} (order {n}, H = {H:g})")
    return 0


def cmd_tangent(args):
    resolved, cfg_hash, out_cfg = load_config(args.config, args)
    stat_data = _field(resolved, "stationary", required=True)
    try:
        config = StationaryConfig.from_dict(stat_data)
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"stationary: malformed ({e})") from e
    ladder = _field(resolved, "tangent.r_ladder")
    seed = int(_field(resolved, "seed", default=0))
    report = check_tangent_convergence(config, r_ladder=ladder, seed=seed)
    out = _out_dir(args, out_cfg)
    lines = ["r,e"]
    for r, e in zip(report.details["r"], report.details["e"]):
        lines.append(f"{fmt(r)},{fmt(e)}")
    _write_text(out / "tangent.csv", "\n".join(lines) + "\n")
    _write_json(out / "tangent.json",
                _sidecar(cfg_hash, seed, {"report": report.to_dict()}))
    print(report.summary_line())
    print(f"wrote {out / 'tangent.csv'}")
    return 0 if report.passed else 1


_CHECK_NAMES = ("self_similarity", "intrinsic_stationarity", "mc_covariance",
                "tangent_convergence", "holder_scaling")


def _default_shifts(d):
    basis = np.eye(d)
    return [list(-3.0 * basis[0]), list(0.9 * basis[d - 1]), list(17.0 * basis[0])]


def _mc_setup(resolved, model, frame, args):
    grid = build_grid(resolved, model.d)
    # frame nodes must be on the grid so probe evaluation can subtract them
    grid = np.concatenate([frame.nodes, grid])
    _, keep = np.unique(np.round(grid, 12), axis=0, return_index=True)
    grid = grid[np.sort(keep)]
    replicates = int(_field(resolved, "replicates", default=1000))
    seed = int(_field(resolved, "seed", default=0))
    real_output = bool(_field(resolved, "real_output", default=True))
    sample = sample_irfk(model, frame, grid, replicates, seed,
                         real_output=real_output,
                         threads=resolve_threads(args.threads))
    node_set = {tuple(np.round(t, 12)) for t in frame.nodes}
    free = [t for t in grid if tuple(np.round(t, 12)) not in node_set]
    pairs = []
    for i in range(0, min(len(free) - 1, 8), 2):
        pairs.append((lambda_t(frame, free[i]), lambda_t(frame, free[i + 1])))
    if not pairs and free:
        pairs = [(lambda_t(frame, free[0]), lambda_t(frame, free[0]))]
    if not pairs:
        raise ConfigError("grid: no non-node points to probe")
    return sample, pairs


def cmd_verify(args):
    resolved, cfg_hash, out_cfg = load_config(args.config, args)
    model = build_model(resolved)
    frame = build_frame_from(resolved, model)
    manifest = _field(resolved, "checks",
                      default=[{"name": "self_similarity"},
                               {"name": "intrinsic_stationarity"},
                               {"name": "holder_scaling"}])
    seed = int(_field(resolved, "seed", default=0))
    reports = []
    for entry in manifest:
        if isinstance(entry, str):
            entry = {"name": entry}
        name = entry.get("name")
        if name == "self_similarity":
            rep = check_self_similarity(
                model, c_values=entry.get("c_values", (0.5, 2.0, 7.3)),
                seed=seed)
        elif name == "intrinsic_stationarity":
            rep = check_intrinsic_stationarity(
                model, shifts=entry.get("shifts", _default_shifts(model.d)),
                seed=seed)
        elif name == "mc_covariance":
            sample, pairs = _mc_setup(resolved, model, frame, args)
            rep = check_mc_covariance(sample, model, pairs)
        elif name == "tangent_convergence":
            stat_data = _field(resolved, "stationary", required=True)
            config = StationaryConfig.from_dict(stat_data)
            rep = check_tangent_convergence(config,
                                            r_ladder=entry.get("r_ladder"),
                                            seed=seed)
        elif name == "holder_scaling":
            rep = check_holder_scaling(model, lags=entry.get("lags"), seed=seed)
        else:
            raise ConfigError(f"checks: unknown check {name!r} "
                              f"(known: {', '.join(_CHECK_NAMES)})")
        if "threshold" in entry:
            thr = float(entry["threshold"])
            rep = replace(rep, threshold=thr, passed=rep.statistic <= thr)
        reports.append(rep)
    reports.sort(key=lambda r: r.name)
    out = _out_dir(args, out_cfg)
    _write_json(out / "verify.json",
                _sidecar(cfg_hash, seed,
                         {"reports": [r.to_dict() for r in reports],
                          "all_passed": all(r.passed for r in reports)}))
    for r in reports:
        print(r.summary_line())
    ok = all(r.passed for r in reports)
    print(f"wrote {out / 'verify.json'}; overall "
          f"{'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def cmd_check_model(args):
    resolved, cfg_hash, out_cfg = load_config(args.config, args)
    model = build_model(resolved)
    seed = int(_field(resolved, "seed", default=0))
    if model.is_scalar:
        adm = {"ok": True, "kind": "scalar", "h": model.exponent.h,
               "range": [0.0, float(model.k + 1)]}
        adm_ok = True
    else:
        rep = admissibility(model.exponent, model.k)
        adm = {"ok": rep.ok, "kind": "operator",
               "eigenvalues_re": [float(x) for x in
                                  model.exponent.eigenvalues.real],
               "epsilon": rep.epsilon, "delta": rep.delta,
               "is_normal": rep.is_normal, "criterion": rep.criterion,
               "reasons": list(rep.reasons)}
        adm_ok = rep.ok
    ti = trace_integrability(model)
    trials = int(_field(resolved, "cond_psd.trials", default=50))
    psd = cond_psd_check(model, trials=trials, seed=seed)
    ok = adm_ok and ti.ok and psd.ok
    doc = _sidecar(cfg_hash, seed, {
        "model_hash": model_hash(model),
        "admissibility": adm,
        "trace_integrability": {"ok": ti.ok, "value": ti.value,
                                "quad_value": ti.quad_value,
                                "head_bound": ti.head_bound,
                                "tail_bound": ti.tail_bound,
                                "analytic_value": ti.analytic_value},
        "cond_psd": {"ok": psd.ok, "min_eig": psd.min_eig, "scale": psd.scale,
                     "trials": psd.trials, "witness": psd.witness},
        "ok": ok})
    out = _out_dir(args, out_cfg)
    _write_json(out / "check_model.json", doc)
    print(f"admissibility {'PASS' if adm_ok else 'FAIL'}; "
          f"trace_integrability {'PASS' if ti.ok else 'FAIL'} "
          f"(value {ti.value:.6g}); "
          f"cond_psd {'PASS' if psd.ok else 'FAIL'} "
          f"(min eig {psd.min_eig:.3e} at scale {psd.scale:.3e})")
    print(f"wrote {out / 'check_model.json'}")
    return 0 if ok else 1


# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="irfk",
        description="Operator self-similar intrinsic random functions: "
                    "covariances, simulation, verification.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        p.add_argument("--replicates", type=int, default=None,
                       help="replicate count override")
        p.add_argument("--quad-q", dest="quad_q", type=int, default=None,
                       help="radial quadrature resolution override")
        p.add_argument("--threads", type=int, default=0,
                       help="worker threads (0 = auto, IRFK_THREADS fallback)")

    for name, fn, help_text in (
            ("cov", cmd_cov, "evaluate covariance blocks for a probe list"),
            ("sim", cmd_sim, "sample the representer field on a grid"),
            ("nfbm", cmd_nfbm, "sample fractional Brownian motion of order n"),
            ("tangent", cmd_tangent, "tangent-field convergence table e(r)"),
            ("verify", cmd_verify, "run the verification check suite"),
            ("check-model", cmd_check_model,
             "admissibility + integrability + conditional PSD")):
        p = sub.add_parser(name, help=help_text)
        common(p)
        if name == "cov":
            p.add_argument("--probes", default=None,
                           help="JSON probe file (overrides config probes)")
        p.set_defaults(fn=fn)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, IoError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (Inadmissible, NotHermitian, IntegerTwoH) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
