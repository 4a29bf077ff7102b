"""Command-line front end: ``avgdyn generate|run|spectrum|verify|sweep``.

Everything a command does is determined by one JSON config document plus the
``--seed``/``--out``/``--format`` overrides (flag > file > default).  The only
environment input is ``WORKERS``, the process count for sweeps, which never
changes results.

Seeds: the graph of a model is generated with ``seed``; the protocol start is
drawn with ``derive_seed(seed, CLI_PROTOCOL)``.  A sweep row with seed ``s``
therefore reproduces ``avgdyn run --seed s`` on the same model.

Exit codes: 0 ok, 2 config or input error, 3 numerical non-convergence,
4 failed check (``verify`` only), 1 anything unexpected.  Errors are reported
as one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import io
import itertools
import json
import math
import numbers
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, _rng
from .dynamics import rademacher_init, run_protocol, signature_run, write_trajectory_csv
from .exceptions import (
    AvgDynError,
    BoundOverflowError,
    ConvergenceError,
    DegenerateInputError,
    GraphFormatError,
    ParameterError,
)
from .generate import MODEL_KINDS, ModelParams, generate
from .graph import (
    RegularityProfile,
    dumps_graph,
    expected_matrix,
    load_graph,
    partition_vector,
    validate_clustered_regular,
    validate_gamma_clustered,
)
from .metrics import (
    rademacher_projection_test,
    reconstruction_report,
    same_partition,
    sweep_summary,
    write_summary_csv,
)
from .spectral import (
    alignment_report,
    decomposition_report,
    degree_deviation_stats,
    eigensolve,
    lambda_stats,
    normalized_laplacian_diff,
    spectral_norm_diff,
)

EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CHECK = 0, 1, 2, 3, 4
COMMANDS = ("generate", "run", "spectrum", "verify", "sweep")
HELP = {
    "generate": "sample a graph from the model and write it as an edge list",
    "run": "run the protocol and report reconstruction quality",
    "spectrum": "eigenvalues of the normalized adjacency and eigenvector alignment",
    "verify": "evaluate the spectral and concentration checks on one graph",
    "sweep": "run the protocol over a grid of (a, b, n, seed)",
}

DEFAULTS = {
    "seed": 0,
    "graph": None,
    "model": {"kind": "regular-sbm", "n": 500, "a": 20, "b": 4, "k": 2},
    "protocol": {"T_max": 100, "ell": 12, "T": None, "W": 10, "eps": 0.1, "checkpoint": "last"},
    "spectral": {
        "m": None,
        "tol": 1e-8,
        "max_iter": 5000,
        "norm_tol": 1e-6,
        "C_norm": 10.0,
        "C_laplacian": 15.0,
        "C_lambda2": 10.0,
        "regsbm_factor": 1.2,
        "alignment_threshold": 0.01,
        "delta": 0.1,
        "trials": 100_000,
        "rademacher_factor": 1.5,
    },
    "sweep": {"a": None, "b": None, "n": None, "seeds": None},
    "output": {"dir": ".", "format": None},
}

# default --format per command
DEFAULT_FORMAT = {"generate": "txt", "run": "json", "spectrum": "json", "verify": "csv", "sweep": "csv"}


class ConfigError(AvgDynError):
    """Carries the full list of violations as ``(field, message)`` pairs."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(f"{f}: {m}" for f, m in self.violations))


class CheckFailure(AvgDynError):
    pass


# -- config ----------------------------------------------------------------

def _is_int(x):
    return isinstance(x, numbers.Integral) and not isinstance(x, bool)


def _is_num(x):
    return isinstance(x, numbers.Real) and not isinstance(x, bool) and math.isfinite(x)


def merge_config(doc, overrides=None):
    """Deep-merge ``doc`` and flag ``overrides`` over :data:`DEFAULTS`.

    Returns ``(cfg, violations)``; unknown or mistyped sections are reported
    rather than raised so that validation can list them with the rest.
    """
    cfg = copy.deepcopy(DEFAULTS)
    bad = []
    if not isinstance(doc, dict):
        return cfg, [("<root>", "config must be a JSON object")]
    for key, val in doc.items():
        if key not in cfg:
            bad.append((key, "unknown field"))
        elif isinstance(cfg[key], dict):
            if not isinstance(val, dict):
                bad.append((key, "must be an object"))
                continue
            for sub, v in val.items():
                if sub not in cfg[key]:
                    bad.append((f"{key}.{sub}", "unknown field"))
                else:
                    cfg[key][sub] = v
        else:
            cfg[key] = val
    for path, val in (overrides or {}).items():
        if val is None:
            continue
        node = cfg
        *parents, leaf = path.split(".")
        for p in parents:
            node = node[p]
        node[leaf] = val
    return cfg, bad


def _seed_ok(s):
    return _is_int(s) and 0 <= s < 2**64


def validate_config(cfg, command=None):
    """Every violated field of ``cfg``, as ``(field, message)`` pairs."""
    bad = []

    def need(cond, field, msg):
        if not cond:
            bad.append((field, msg))
        return cond

    need(_seed_ok(cfg["seed"]), "seed", "must be an unsigned 64-bit integer")
    need(cfg["graph"] is None or isinstance(cfg["graph"], str), "graph", "must be a path or null")

    m = cfg["model"]
    model_ok = need(m["kind"] in MODEL_KINDS, "model.kind", f"must be one of {list(MODEL_KINDS)}")
    model_ok &= need(_is_int(m["n"]) and m["n"] >= 1, "model.n", "must be a positive integer")
    model_ok &= need(_is_num(m["a"]) and m["a"] >= 0, "model.a", "must be a non-negative number")
    model_ok &= need(_is_num(m["b"]) and m["b"] >= 0, "model.b", "must be a non-negative number")
    model_ok &= need(_is_int(m["k"]) and m["k"] >= 2, "model.k", "must be an integer >= 2")
    if model_ok and cfg["graph"] is None and _seed_ok(cfg["seed"]):
        try:
            ModelParams(m["kind"], m["n"], m["a"], m["b"], m["k"], cfg["seed"])
        except ParameterError as exc:
            bad.append(("model", str(exc)))

    p = cfg["protocol"]
    need(_is_int(p["T_max"]) and p["T_max"] >= 1, "protocol.T_max", "must be an integer >= 1")
    need(_is_int(p["ell"]) and p["ell"] >= 1, "protocol.ell", "must be an integer >= 1")
    need(p["T"] is None or (_is_int(p["T"]) and p["T"] >= 0), "protocol.T", "must be null or an integer >= 0")
    need(_is_int(p["W"]) and p["W"] >= 1, "protocol.W", "must be an integer >= 1")
    need(_is_num(p["eps"]) and 0 <= p["eps"] <= 1, "protocol.eps", "must lie in [0, 1]")
    need(p["checkpoint"] in ("last", "all"), "protocol.checkpoint", "must be 'last' or 'all'")

    s = cfg["spectral"]
    need(s["m"] is None or (_is_int(s["m"]) and s["m"] >= 2), "spectral.m", "must be null or an integer >= 2")
    need(_is_int(s["max_iter"]) and s["max_iter"] >= 1, "spectral.max_iter", "must be an integer >= 1")
    need(_is_int(s["trials"]) and s["trials"] >= 10_000, "spectral.trials", "must be an integer >= 10000")
    for key in ("tol", "norm_tol", "C_norm", "C_laplacian", "C_lambda2", "regsbm_factor",
                "alignment_threshold", "rademacher_factor"):
        need(_is_num(s[key]) and s[key] > 0, f"spectral.{key}", "must be a positive number")
    need(_is_num(s["delta"]) and s["delta"] >= 0, "spectral.delta", "must be a non-negative number")

    for axis, check, msg in (
        ("a", lambda v: _is_num(v) and v >= 0, "non-negative numbers"),
        ("b", lambda v: _is_num(v) and v >= 0, "non-negative numbers"),
        ("n", lambda v: _is_int(v) and v >= 1, "positive integers"),
        ("seeds", _seed_ok, "unsigned 64-bit integers"),
    ):
        vals = cfg["sweep"][axis]
        if vals is None:
            continue
        if need(isinstance(vals, list) and len(vals) > 0, f"sweep.{axis}", "must be a non-empty list"):
            need(all(check(v) for v in vals), f"sweep.{axis}", f"entries must be {msg}")

    o = cfg["output"]
    need(isinstance(o["dir"], str) and o["dir"] != "", "output.dir", "must be a non-empty path")
    need(o["format"] in (None, "csv", "json"), "output.format", "must be 'csv', 'json' or null")
    if command == "generate" and o["format"] is not None:
        bad.append(("output.format", "generate writes the text graph format only"))
    return bad


def config_digest(cfg):
    """SHA-256 of the canonical effective config (the output directory excluded)."""
    doc = copy.deepcopy(cfg)
    doc["output"].pop("dir", None)
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def load_config(path, overrides=None, command=None):
    doc = {}
    base = os.getcwd()
    if path is not None:
        try:
            with open(path, "rb") as fh:
                doc = json.loads(fh.read().decode("utf-8"))
        except OSError as exc:
            raise ConfigError([("--config", f"cannot read {path}: {exc.strerror}")]) from None
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ConfigError([("--config", f"invalid JSON: {exc}")]) from None
        base = os.path.dirname(os.path.abspath(path))
    cfg, bad = merge_config(doc, overrides)
    bad += validate_config(cfg, command)
    if isinstance(cfg["output"]["dir"], str) and cfg["output"]["dir"]:
        try:
            os.makedirs(cfg["output"]["dir"], exist_ok=True)
            if not os.access(cfg["output"]["dir"], os.W_OK):
                bad.append(("output.dir", "not writable"))
        except OSError as exc:
            bad.append(("output.dir", f"cannot create: {exc.strerror}"))
    if isinstance(cfg["graph"], str) and not os.path.isabs(cfg["graph"]):
        cfg["graph"] = os.path.normpath(os.path.join(base, cfg["graph"]))
    if bad:
        raise ConfigError(bad)
    return cfg


# -- shared helpers --------------------------------------------------------

class Context:
    """Resolved config plus the metadata stamped on every output."""

    def __init__(self, cfg, command):
        self.cfg = cfg
        self.command = command
        self.seed = int(cfg["seed"])
        self.digest = config_digest(cfg)
        self.out = cfg["output"]["dir"]
        self.format = cfg["output"]["format"] or DEFAULT_FORMAT[command]
        self.written = []

    @property
    def meta(self):
        return {
            "command": self.command,
            "config_sha256": self.digest,
            "seed": self.seed,
            "version": __version__,
            "rng": _rng.RNG_NAME,
        }

    @property
    def header_line(self):
        return f"# config_sha256={self.digest} seed={self.seed} version={__version__}"

    def path(self, name):
        return os.path.join(self.out, name)

    def write_text(self, name, text):
        p = self.path(name)
        with open(p, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        self.written.append(p)
        return p

    def write_json(self, name, payload):
        doc = {"meta": self.meta, **payload}
        return self.write_text(name, json.dumps(_jsonable(doc), indent=2) + "\n")

    def write_csv(self, name, fill):
        """``fill(fh)`` writes the CSV body after the metadata comment line."""
        buf = io.StringIO(newline="")
        buf.write(self.header_line + "\r\n")
        fill(buf)
        return self.write_text(name, buf.getvalue())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def protocol_seed(seed):
    return _rng.derive_seed(seed, _rng.CLI_PROTOCOL)


def model_params(cfg, seed=None, **axes):
    m = dict(cfg["model"], **axes)
    return ModelParams(m["kind"], m["n"], m["a"], m["b"], m["k"], cfg["seed"] if seed is None else seed)


def build_graph(cfg):
    if cfg["graph"] is not None:
        try:
            return load_graph(cfg["graph"])
        except OSError as exc:
            raise ConfigError([("graph", f"cannot read {cfg['graph']}: {exc.strerror}")]) from None
    return generate(model_params(cfg))


def nominal_degrees(g, cfg):
    """``(d, b)``: from the model, or read off the graph when one is loaded."""
    if cfg["graph"] is None:
        m = cfg["model"]
        return float(m["a"] + (m["k"] - 1) * m["b"]), float(m["b"])
    deg = g.degrees
    cross = g.cross_degrees() if g.num_communities == 2 else None
    if cross is not None and np.all(deg == deg[0]) and np.all(cross == cross[0]):
        return float(deg[0]), float(cross[0])
    return float(deg.mean()), float(cross.mean()) if cross is not None else 0.0


def solve_spectrum(g, cfg, seed):
    s = cfg["spectral"]
    k = g.num_communities
    m = s["m"] if s["m"] is not None else k + 2
    return eigensolve(g, m, k=k, tol=s["tol"], max_iter=s["max_iter"], seed=seed)


# -- commands --------------------------------------------------------------

def cmd_generate(ctx):
    g = build_graph(ctx.cfg)
    ctx.write_text("graph.txt", dumps_graph(g, comment=ctx.header_line[2:]))
    return EXIT_OK


def _run_report(g, cfg, seed):
    p = cfg["protocol"]
    traj = run_protocol(g, p["T_max"], seed=protocol_seed(seed), checkpoint_policy=p["checkpoint"])
    rep = reconstruction_report(traj, g.truth, k=g.num_communities, eps=p["eps"])
    return traj, rep


def cmd_run(ctx):
    cfg = ctx.cfg
    g = build_graph(cfg)
    traj, rep = _run_report(g, cfg, ctx.seed)
    ctx.write_csv("trajectory.csv", lambda fh: write_trajectory_csv(traj, fh))
    payload = {"reconstruction": rep.to_dict()}
    if g.num_communities > 2:
        p = cfg["protocol"]
        table = signature_run(g, p["ell"], T=p["T"], W=p["W"], seed=protocol_seed(ctx.seed))
        payload["signature"] = {
            "ell": table.ell,
            "T": table.T,
            "W": table.W,
            "num_groups": table.num_groups,
            "num_undetermined": table.num_undetermined,
            "matches_truth": bool(table.assigned.all() and same_partition(table.labels, g.truth)),
            "labels": table.labels,
        }
    if ctx.format == "json":
        ctx.write_json("report.json", payload)
    else:
        d = rep.to_dict()
        row = {k: d[k] for k in ("rounds", "final_agreement", "strong", "eps", "eps_weak",
                                 "first_strong_round", "convergence_round")}
        if "signature" in payload:
            row.update(signature_groups=payload["signature"]["num_groups"],
                       signature_matches_truth=payload["signature"]["matches_truth"])
        ctx.write_csv("report.csv", lambda fh: write_summary_csv([row], fh))
    return EXIT_OK


def cmd_spectrum(ctx):
    cfg = ctx.cfg
    g = build_graph(cfg)
    sr = solve_spectrum(g, cfg, ctx.seed)
    payload = {"spectrum": sr.to_dict()}
    if g.num_communities == 2:
        d, _ = nominal_degrees(g, cfg)
        al = alignment_report(g, sr, d=d, threshold=cfg["spectral"]["alignment_threshold"])
        payload["alignment"] = {
            "size": al.size,
            "max_entry_error": al.max_entry_error,
            "sign_error_count": al.sign_error_count,
            "threshold": al.threshold,
            "d_nominal": al.d_nominal,
            "degenerate": al.degenerate,
            "misaligned_set": al.misaligned_set,
        }
    if ctx.format == "json":
        ctx.write_json("spectrum.json", payload)
    else:
        def fill(fh):
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(["index", "eigenvalue", "residual"])
            for i, (v, r) in enumerate(zip(sr.eigenvalues, sr.residuals), start=1):
                w.writerow([i, f"{v:.17g}", f"{r:.17g}"])
            w.writerow(["min", f"{sr.min_eigenvalue:.17g}", f"{sr.min_residual:.17g}"])
        ctx.write_csv("spectrum.csv", fill)
    return EXIT_OK


def _check(name, status, value=None, bound=None, detail=""):
    return {"check": name, "status": status, "value": value, "bound": bound, "detail": detail}


def verify_checks(g, cfg, seed):
    """Evaluate every verification check on ``g``; returns a list of rows."""
    s = cfg["spectral"]
    rows = []
    if g.num_communities != 2:
        return [_check("two_communities", "fail", g.num_communities, 2, "checks are defined for k = 2")]
    N = g.num_nodes
    n = g.community_size
    d, b = nominal_degrees(g, cfg)
    nu = 1.0 - 2.0 * b / d
    sr = solve_spectrum(g, cfg, seed)
    st = lambda_stats(sr, 2)
    regular = validate_clustered_regular(g, d, b).ok

    chi = partition_vector(g)
    if regular:
        err = float(np.abs(g.transition_matrix() @ chi - nu * chi).max())
        rows.append(_check("chi_eigenvector", "pass" if err <= 1e-12 else "fail", err, 1e-12,
                           "||P chi - nu chi||_inf"))
    else:
        rows.append(_check("chi_eigenvector", "skip", detail="graph is not clustered regular"))

    rows.append(_check("spectral_gap", "pass" if st.lam < nu else "fail", st.lam, nu, "lambda < nu"))

    x0 = rademacher_init(N, protocol_seed(seed))
    T = cfg["protocol"]["T_max"]
    try:
        rep = decomposition_report(g, x0, RegularityProfile(d, b), sr, T)
    except DegenerateInputError as exc:
        rows.append(_check("decomposition_bound", "skip", detail=str(exc)))
    else:
        ts = np.arange(T + 1)
        if regular:
            excess = rep.residual_chi_inf - st.lam**ts * math.sqrt(N)
            what = "max_t ||x_t - a1 1 - a2 l2^t chi||_inf - lambda^t sqrt(N)"
        else:
            excess = rep.residual_l2 - 4.0 * st.lam**ts * rep.x_norm
            what = "max_t ||e_t|| - 4 lambda^t ||x||"
        worst = float(excess.max())
        rows.append(_check("decomposition_bound", "pass" if worst <= 1e-8 else "fail", worst, 1e-8, what))

    gamma = validate_gamma_clustered(g, RegularityProfile(d, b)).gamma_star
    if st.lambda3 < nu:
        lb = nu - 10.0 * gamma - 1e-8
        rows.append(_check("lambda2_gamma_bound", "pass" if st.lambda2 >= lb else "fail", st.lambda2, lb,
                           f"lambda2 >= nu - 10 gamma*, gamma*={gamma:.6g}"))
    else:
        rows.append(_check("lambda2_gamma_bound", "skip", detail="premise lambda3 < nu fails"))

    lb = nu - s["C_lambda2"] / math.sqrt(d)
    rows.append(_check("lambda2_degree_bound", "pass" if st.lambda2 >= lb else "fail", st.lambda2, lb,
                       "lambda2 >= nu - C / sqrt(d)"))

    try:
        B = expected_matrix(n, d - b, b)
    except ParameterError as exc:
        rows.append(_check("norm_A_minus_B", "skip", detail=str(exc)))
        rows.append(_check("norm_dN_minus_B", "skip", detail=str(exc)))
    else:
        ra = spectral_norm_diff(g, B, tol=s["norm_tol"], seed=seed) / math.sqrt(d)
        rows.append(_check("norm_A_minus_B", "pass" if ra <= s["C_norm"] else "fail", ra, s["C_norm"],
                           "||A - B|| / sqrt(d)"))
        rn = normalized_laplacian_diff(g, B, d=d, tol=s["norm_tol"], seed=seed) / math.sqrt(d)
        rows.append(_check("norm_dN_minus_B", "pass" if rn <= s["C_laplacian"] else "fail", rn,
                           s["C_laplacian"], "||d N - B|| / sqrt(d)"))

    dev = degree_deviation_stats(g, d)
    rows.append(_check("degree_sqrt_sum", "pass" if dev.sqrt_sum <= 2 * n else "fail", dev.sqrt_sum, 2 * n,
                       "sum (sqrt d_i - sqrt d)^2"))
    rows.append(_check("degree_square_sum", "pass" if dev.square_sum <= 2 * d * n else "fail",
                       dev.square_sum, 2 * d * n, "sum (d_i - d)^2"))

    if cfg["graph"] is None and cfg["model"]["kind"] == "regular-sbm":
        cap = s["regsbm_factor"] * 2.0 * math.sqrt(d - 1) / d
        rows.append(_check("regsbm_lambda", "pass" if st.lam <= cap else "fail", st.lam, cap,
                           "lambda <= factor * 2 sqrt(d - 1) / d"))
    else:
        rows.append(_check("regsbm_lambda", "skip", detail="model is not regular-sbm"))

    prob = rademacher_projection_test(np.ones(N), s["delta"], trials=s["trials"], seed=seed)
    cap = s["rademacher_factor"] * s["delta"]
    rows.append(_check("rademacher_projection", "pass" if prob <= cap else "fail", prob, cap,
                       f"Pr[|<1/sqrt(N), x>| <= {s['delta']:g}]"))
    return rows


def cmd_verify(ctx):
    g = build_graph(ctx.cfg)
    rows = verify_checks(g, ctx.cfg, ctx.seed)
    if ctx.format == "json":
        ctx.write_json("verify.json", {"checks": rows})
    else:
        cols = ["check", "status", "value", "bound", "detail"]
        ctx.write_csv("verify.csv", lambda fh: write_summary_csv(rows, fh, cols))
    width = max(len(r["check"]) for r in rows)
    for r in rows:
        print(f"{r['check']:<{width}}  {r['status']}", file=sys.stdout)
    if any(r["status"] == "fail" for r in rows):
        raise CheckFailure("verification failed: " + ", ".join(r["check"] for r in rows if r["status"] == "fail"))
    return EXIT_OK


def sweep_axes(cfg):
    sw, m = cfg["sweep"], cfg["model"]
    return (
        sw["a"] or [m["a"]],
        sw["b"] or [m["b"]],
        sw["n"] or [m["n"]],
        sw["seeds"] or [cfg["seed"]],
    )


def _sweep_cell(cfg, a, b, n, seed):
    """One (a, b, n, seed) run; failures become part of the row."""
    row = {"a": a, "b": b, "n": n, "seed": seed}
    try:
        g = generate(model_params(cfg, seed=seed, a=a, b=b, n=n))
        _, rep = _run_report(g, cfg, seed)
    except (AvgDynError, ValueError, ArithmeticError) as exc:
        row.update(status="error", error=f"{type(exc).__name__}: {exc}")
        return row, None
    row.update(
        status="ok",
        final_agreement=rep.final_agreement,
        misclassified_fraction=rep.misclassified_fraction,
        strong=rep.strong,
        eps_weak=rep.eps_weak(),
        convergence_round=rep.convergence_round,
        first_strong_round=rep.first_strong_round,
        error=None,
    )
    return row, rep


def workers_from_env(environ=None):
    raw = (os.environ if environ is None else environ).get("WORKERS")
    if raw is None or raw == "":
        return 1
    try:
        w = int(raw)
    except ValueError:
        w = 0
    if w < 1:
        raise ConfigError([("WORKERS", f"must be a positive integer, got {raw!r}")])
    return w


def run_sweep(cfg, workers=1):
    """Rows for every (a, b, n, seed) plus one summary per (a, b, n) cell, sorted by axes then seed."""
    A, Bs, Ns, seeds = sweep_axes(cfg)
    tasks = sorted(itertools.product(A, Bs, Ns, seeds))
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_cell, itertools.repeat(cfg), *zip(*tasks)))
    else:
        results = [_sweep_cell(cfg, *t) for t in tasks]
    rows = [r for r, _ in results]
    summary = []
    for key, group in itertools.groupby(results, key=lambda rr: (rr[0]["a"], rr[0]["b"], rr[0]["n"])):
        group = list(group)
        reps = [rep for _, rep in group if rep is not None]
        params = dict(zip(("a", "b", "n"), key))
        cell_seeds = [r["seed"] for r, _ in group]
        if reps:
            srow = sweep_summary(reps, params)
        else:
            srow = dict(params, num_runs=0)
        srow["num_errors"] = len(group) - len(reps)
        srow["seeds"] = " ".join(map(str, cell_seeds))
        summary.append(srow)
    return rows, summary


ROW_COLUMNS = ["a", "b", "n", "seed", "status", "final_agreement", "misclassified_fraction", "strong",
               "eps_weak", "convergence_round", "first_strong_round", "error"]
SUMMARY_COLUMNS = ["a", "b", "n", "num_runs", "num_errors", "mean_agreement", "median_agreement",
                   "agreement_variance", "strong_frequency", "median_convergence_round", "seeds"]


def cmd_sweep(ctx):
    rows, summary = run_sweep(ctx.cfg, workers_from_env())
    if ctx.format == "json":
        ctx.write_json("sweep.json", {"rows": rows, "summary": summary})
    else:
        ctx.write_csv("sweep.csv", lambda fh: write_summary_csv(rows, fh, ROW_COLUMNS))
        ctx.write_csv("sweep_summary.csv", lambda fh: write_summary_csv(summary, fh, SUMMARY_COLUMNS))
    return EXIT_OK


HANDLERS = {
    "generate": cmd_generate,
    "run": cmd_run,
    "spectrum": cmd_spectrum,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


# -- entry point -----------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="avgdyn", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, help=HELP[name], description=HELP[name])
        sp.add_argument("--config", metavar="PATH", help="JSON config document")
        sp.add_argument("--seed", metavar="U64", help="master seed (overrides config)")
        sp.add_argument("--out", metavar="DIR", help="output directory (overrides config)")
        sp.add_argument("--format", choices=("csv", "json"), help="report format (overrides config)")
    return parser


def _emit_error(kind, message, **extra):
    doc = {"error": kind, "message": message, **extra}
    print(json.dumps(_jsonable(doc), sort_keys=True), file=sys.stderr)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        seed = None
        if args.seed is not None:
            try:
                seed = int(args.seed)
            except ValueError:
                raise ConfigError([("--seed", f"not an integer: {args.seed!r}")]) from None
        overrides = {"seed": seed, "output.dir": args.out, "output.format": args.format}
        cfg = load_config(args.config, overrides, args.command)
        ctx = Context(cfg, args.command)
        code = HANDLERS[args.command](ctx)
        for p in ctx.written:
            print(p)
        return code
    except ConfigError as exc:
        _emit_error("config", str(exc), violations=[{"field": f, "message": m} for f, m in exc.violations])
        return EXIT_CONFIG
    except (ParameterError, GraphFormatError, DegenerateInputError) as exc:
        extra = {"lineno": exc.lineno} if isinstance(exc, GraphFormatError) else {}
        _emit_error("input", str(exc), type=type(exc).__name__, **extra)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        _emit_error("convergence", str(exc), best_residual=exc.best_residual, iterations=exc.iterations)
        return EXIT_NUMERIC
    except BoundOverflowError as exc:
        _emit_error("numeric", str(exc))
        return EXIT_NUMERIC
    except CheckFailure as exc:
        _emit_error("check", str(exc))
        return EXIT_CHECK
    except Exception as exc:  # noqa: BLE001
        _emit_error("internal", f"{type(exc).__name__}: {exc}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
