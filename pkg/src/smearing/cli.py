"""Command-line front end.

Every artifact records the fully resolved configuration (including the
seed).  Passing that artifact back with ``--config`` reproduces it.

Exit codes: 0 success / confident verdict, 1 usage or config error,
2 inconclusive attack verdict.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from .attack import (
    PlweInstance,
    SampleBatch,
    Verdict,
    DecisionParams,
    derive_seed,
    gen_plwe_samples,
    gen_uniform_samples,
    plan_decision,
    smearing_attack,
    success_probs,
)
from .dist import GaussianParams, ProbDist, discrete_gaussian_zq, mapped_error_dist, sample
from .errors import InputExhaustedError, NotFoundError, SmearingError
from .ring import PolyModF, RingParams, eval_batch, find_roots
from .smear import (
    choose_trials,
    decision_curves,
    er_approx,
    mc_smear_estimate,
    nonuniform_table,
    uniform_grid,
)

EXIT_OK, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2


class UsageError(Exception):
    pass


class SampleFileError(UsageError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- helpers


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def resolve_ring(cfg: dict) -> RingParams:
    q = cfg["q"]
    if q is None:
        raise UsageError("--q is required")
    if cfg.get("f"):
        f = list(cfg["f"])
        roots = find_roots(f, q)
        gamma = cfg.get("gamma")
        if gamma is None:
            if not roots:
                raise UsageError(f"f has no root mod {q}")
            gamma = roots[0]
        elif gamma % q not in roots:
            raise UsageError(f"gamma={gamma} is not a root of f mod {q}; roots found: {roots}")
        return RingParams(q, tuple(f), gamma)
    n = cfg.get("n")
    if n is None:
        raise UsageError("give --f or --n")
    if cfg.get("negacyclic"):
        return RingParams.negacyclic(q, n, cfg.get("gamma"))
    if cfg.get("gamma") is None:
        raise UsageError("--gamma is required unless --f or --negacyclic is given")
    return RingParams.from_root(q, n, cfg["gamma"])


def resolve_gaussian(cfg: dict) -> GaussianParams | None:
    sigma, beta = cfg.get("sigma"), cfg.get("beta")
    if sigma is None and beta is None:
        return None
    if sigma is not None and beta is not None:
        raise UsageError("give only one of --sigma and --beta")
    return GaussianParams(sigma=sigma, beta=beta)


def ring_config(params: RingParams) -> dict:
    return {"q": params.q, "n": params.n, "f": list(params.f_coeffs), "gamma": params.gamma}


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def to_csv(header, rows, config) -> str:
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def to_json(payload) -> str:
    return json.dumps(payload, indent=2) + "\n"


def emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def load_config(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    for line in text.splitlines():
        if line.startswith("# config: "):
            return json.loads(line[len("# config: "):])
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"cannot read config from {path}: {exc}")
    if isinstance(data, dict) and isinstance(data.get("config"), dict):
        return data["config"]
    if isinstance(data, dict):
        return data
    raise UsageError(f"{path} holds no config object")


def _chi_from_config(cfg: dict) -> tuple[ProbDist, dict]:
    """The non-uniform law to compare against: from a file or a mapped Gaussian."""
    if cfg.get("chi_file"):
        with open(cfg["chi_file"], encoding="utf-8") as fh:
            chi = ProbDist.from_json(fh.read())
        return chi, {"chi_file": cfg["chi_file"]}
    if cfg.get("uniform_chi"):
        return ProbDist.uniform(cfg["q"]), {"uniform_chi": True}
    gauss = resolve_gaussian(cfg)
    if gauss is None:
        raise UsageError("describe chi with --sigma/--beta plus ring flags, --chi-file, or --uniform-chi")
    params = resolve_ring(cfg)
    chi = mapped_error_dist(discrete_gaussian_zq(params.q, gauss), params)
    return chi, {**ring_config(params), "sigma": cfg.get("sigma"), "beta": cfg.get("beta")}


# ---------------------------------------------------------------- commands


def cmd_prob(cfg: dict) -> int:
    m_min, m_max = cfg["m_min"], cfg["m_max"]
    if m_max is None or m_min < 0 or m_max < m_min:
        raise UsageError("need 0 <= --m-min <= --m-max")
    if (cfg.get("q") is None) == (cfg.get("q_max") is None):
        raise UsageError("give exactly one of --q or --q-max")
    seed = cfg["seed"]
    chi_cfg = {}
    if cfg.get("q_max") is not None:
        if cfg["q_max"] < 1:
            raise UsageError("--q-max must be >= 1")
        qs = range(1, cfg["q_max"] + 1)
        tables = {q: row for q, row in zip(qs, uniform_grid(cfg["q_max"], m_max)[1:])}
        dists = {q: ProbDist.uniform(q) for q in qs}
    else:
        q = cfg["q"]
        if q < 1:
            raise UsageError("--q must be >= 1")
        if resolve_gaussian(cfg) is not None or cfg.get("chi_file"):
            chi, chi_cfg = _chi_from_config(cfg)
            if chi.q != q:
                raise UsageError(f"chi lives on Z_{chi.q}, not Z_{q}")
            tables = {q: nonuniform_table(chi, m_max).values}
            dists = {q: chi}
        else:
            tables = {q: uniform_grid(q, m_max)[q]}
            dists = {q: ProbDist.uniform(q)}

    header = ["m", "q", "p_exact"]
    if cfg["approx"]:
        header.append("p_approx")
    if cfg["mc_trials"]:
        header.append("p_mc")
    rows = []
    for q, row in tables.items():
        for m in range(m_min, m_max + 1):
            r = [m, q, float(row[m])]
            if cfg["approx"]:
                r.append(er_approx(m, q))
            if cfg["mc_trials"]:
                r.append(mc_smear_estimate(dists[q], m, cfg["mc_trials"], derive_seed(seed, q, m)))
            rows.append(r)

    config = {k: cfg[k] for k in ("command", "q", "q_max", "m_min", "m_max", "approx", "mc_trials", "seed")}
    config.update(chi_cfg)
    if cfg["json"]:
        text = to_json({"config": config, "rows": [dict(zip(header, r)) for r in rows]})
    else:
        text = to_csv(header, rows, config)
    emit(text, cfg.get("out"))
    return EXIT_OK


def cmd_curves(cfg: dict) -> int:
    chi, chi_cfg = _chi_from_config(cfg)
    rows = decision_curves(chi.q, chi, cfg["m_max"])
    config = {"command": "curves", "m_max": cfg["m_max"], **chi_cfg}
    header = ["m", "p_uniform", "p_chi", "p_correct"]
    if cfg["json"]:
        text = to_json({"config": config, "rows": [dict(zip(header, r)) for r in rows]})
    else:
        text = to_csv(header, rows, config)
    emit(text, cfg.get("out"))
    return EXIT_OK


def cmd_mapdist(cfg: dict) -> int:
    params = resolve_ring(cfg)
    q = params.q
    if cfg.get("uniform_base"):
        base = ProbDist.uniform(q)
    else:
        gauss = resolve_gaussian(cfg)
        if gauss is None:
            raise UsageError("give --sigma or --beta (or --uniform-base)")
        base = discrete_gaussian_zq(q, gauss)
    mapped = mapped_error_dist(base, params)
    config = {
        "command": "mapdist",
        **ring_config(params),
        "sigma": cfg.get("sigma"),
        "beta": cfg.get("beta"),
        "uniform_base": bool(cfg.get("uniform_base")),
        "mc_samples": cfg.get("mc_samples"),
        "seed": cfg["seed"],
    }
    if cfg.get("mc_samples"):
        k = cfg["mc_samples"]
        coeffs = sample(base, k * params.n, cfg["seed"]).reshape(k, params.n)
        hist = np.bincount(eval_batch(coeffs, params), minlength=q) / k
        mc_rows = [(j, float(mapped[j]), float(hist[j])) for j in range(q)]
        tv = 0.5 * float(np.abs(hist - mapped.probs).sum())
        mc_text = to_csv(["j", "p_exact", "p_mc"], mc_rows, {**config, "tv_distance": tv})
        if cfg.get("mc_out"):
            emit(mc_text, cfg["mc_out"])
        config["mc_tv_distance"] = tv
    if cfg["json"]:
        payload = {
            "config": config,
            "coefficient_dist": [float(x) for x in base.probs],
            "mapped_dist": json.loads(mapped.to_json()),
        }
        text = to_json(payload)
    else:
        rows = [(j, float(base[j]), float(mapped[j])) for j in range(q)]
        text = to_csv(["j", "p_coefficient", "p_mapped"], rows, config)
    emit(text, cfg.get("out"))
    return EXIT_OK


def cmd_params(cfg: dict) -> int:
    alpha, beta_err = cfg["alpha"], cfg["beta_err"]
    if cfg.get("p_u") is not None or cfg.get("p_chi") is not None:
        if cfg.get("p_u") is None or cfg.get("p_chi") is None:
            raise UsageError("--p-u and --p-chi go together")
        n = choose_trials(cfg["p_u"], cfg["p_chi"], alpha, beta_err)
        result = {"n_trials": n, "p_uniform": cfg["p_u"], "p_chi": cfg["p_chi"]}
        config = {k: cfg[k] for k in ("command", "p_u", "p_chi", "alpha", "beta_err")}
        q = cfg.get("q")
    else:
        chi, chi_cfg = _chi_from_config(cfg)
        q = chi.q
        try:
            plan = plan_decision(q, chi, alpha, beta_err, cfg["m_cap"])
        except NotFoundError as exc:
            raise UsageError(
                f"no usable m: chi is too close to uniform for the smearing decision ({exc})"
            )
        result = {
            "m": plan.params.m,
            "n_trials": plan.params.n_trials,
            "m_smallest": plan.m_smallest,
            "p_uniform": plan.p_uniform,
            "p_chi": plan.p_chi,
        }
        config = {"command": "params", "alpha": alpha, "beta_err": beta_err, "m_cap": cfg["m_cap"], **chi_cfg}
    if q is not None:
        pu_ok, plwe_ok = success_probs(alpha, beta_err, q)
        result.update(predicted_success_uniform=pu_ok, predicted_success_plwe=plwe_ok)
    result.update(alpha_err=alpha, beta_err=beta_err)
    if cfg["json"]:
        text = to_json({"config": config, "result": result})
    else:
        text = to_csv(["key", "value"], list(result.items()), config)
    emit(text, cfg.get("out"))
    return EXIT_OK


def read_sample_file(path: str, params: RingParams) -> SampleBatch:
    """Rows of 2n integers: a_0..a_{n-1}, b_0..b_{n-1}.  '#' lines are comments."""
    n, q = params.n, params.q
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            try:
                vals = [int(p) for p in parts]
            except ValueError:
                raise SampleFileError(f"{path}:{lineno}: non-integer field")
            if len(vals) != 2 * n:
                raise SampleFileError(f"{path}:{lineno}: expected {2 * n} fields, got {len(vals)}")
            if any(v < 0 or v >= q for v in vals):
                raise SampleFileError(f"{path}:{lineno}: value outside [0, {q})")
            rows.append(vals)
    arr = np.array(rows, dtype=np.int64).reshape(-1, 2 * n)
    return SampleBatch(arr[:, :n], arr[:, n:])


def _file_source(batch: SampleBatch):
    cursor = 0

    def source(count, _seed):
        nonlocal cursor
        if cursor + count > len(batch):
            raise InputExhaustedError(f"sample file exhausted after {len(batch)} samples")
        out = batch[cursor : cursor + count]
        cursor += count
        return out

    return source


def _instance(cfg: dict, params: RingParams) -> PlweInstance:
    gauss = resolve_gaussian(cfg)
    if gauss is None:
        raise UsageError("plwe mode needs --sigma or --beta")
    return PlweInstance.generate(params, gauss, derive_seed(cfg["seed"]), secret=cfg.get("secret"))


def cmd_samples(cfg: dict) -> int:
    params = resolve_ring(cfg)
    seed = cfg["seed"]
    config = {"command": "samples", "mode": cfg["mode"], "count": cfg["count"], **ring_config(params), "seed": seed}
    if cfg["mode"] == "plwe":
        inst = _instance(cfg, params)
        batch = gen_plwe_samples(inst, cfg["count"], derive_seed(seed, 1))
        config.update(sigma=cfg.get("sigma"), beta=cfg.get("beta"), secret=list(inst.secret.coeffs))
    else:
        batch = gen_uniform_samples(params, cfg["count"], derive_seed(seed, 1))
    rows = np.hstack([batch.a, batch.b]).tolist()
    header = [f"a{i}" for i in range(params.n)] + [f"b{i}" for i in range(params.n)]
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
    buf.write("# " + ",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(str(v) for v in r) + "\n")
    emit(buf.getvalue(), cfg.get("out"))
    return EXIT_OK


def cmd_attack(cfg: dict) -> int:
    params = resolve_ring(cfg)
    seed = cfg["seed"]
    mode = cfg["mode"]
    extra = {}
    inst = None
    if mode == "plwe":
        inst = _instance(cfg, params)
        source = lambda count, s: gen_plwe_samples(inst, count, s)  # noqa: E731
        extra["true_s_gamma"] = inst.secret_at_gamma
    elif mode == "uniform":
        source = lambda count, s: gen_uniform_samples(params, count, s)  # noqa: E731
    else:
        if not cfg.get("samples"):
            raise UsageError("file mode needs --samples PATH")
        source = _file_source(read_sample_file(cfg["samples"], params))

    if cfg["auto_params"]:
        gauss = resolve_gaussian(cfg)
        if gauss is None:
            raise UsageError("--auto-params needs --sigma or --beta to model the error distribution")
        chi = mapped_error_dist(discrete_gaussian_zq(params.q, gauss), params)
        try:
            plan = plan_decision(params.q, chi, cfg["alpha"], cfg["beta_err"], cfg["m_cap"])
        except NotFoundError as exc:
            raise UsageError(f"cannot choose m automatically: {exc}")
        dp = plan.params
        extra.update(p_uniform=plan.p_uniform, p_chi=plan.p_chi)
    else:
        if cfg.get("m") is None or cfg.get("trials") is None:
            raise UsageError("give --m and --trials, or --auto-params")
        dp = DecisionParams(cfg["m"], cfg["trials"], cfg["alpha"], cfg["beta_err"])

    report = smearing_attack(source, params, dp, seed)
    config = {
        "command": "attack",
        "mode": mode,
        **ring_config(params),
        "sigma": cfg.get("sigma"),
        "beta": cfg.get("beta"),
        "secret": list(inst.secret.coeffs) if inst else cfg.get("secret"),
        "samples": cfg.get("samples"),
        "auto_params": cfg["auto_params"],
        "m": cfg.get("m"),
        "trials": cfg.get("trials"),
        "alpha": cfg["alpha"],
        "beta_err": cfg["beta_err"],
        "m_cap": cfg["m_cap"],
        "seed": seed,
    }
    report.extra.update(extra)
    report.extra["config"] = config
    emit(report.to_json() + "\n", cfg.get("out"))
    return EXIT_INCONCLUSIVE if report.verdict is Verdict.INCONCLUSIVE else EXIT_OK


# ---------------------------------------------------------------- parser


def _add_output(p):
    p.add_argument("--json", action="store_true", help="emit JSON instead of CSV")
    p.add_argument("--out", metavar="PATH", help="write to PATH instead of stdout")
    p.add_argument("--config", metavar="PATH", help="reuse the config recorded in an artifact")


def _add_ring(p):
    p.add_argument("--q", type=int, help="prime modulus")
    p.add_argument("--n", type=int, help="degree of f")
    p.add_argument("--f", type=_int_list, help="ascending coefficients of monic f, e.g. 49,0,1")
    p.add_argument("--negacyclic", action="store_true", help="use f(x) = x^n + 1")
    p.add_argument("--gamma", type=int, help="root of f mod q")


def _add_gauss(p):
    p.add_argument("--sigma", type=float, help="Gaussian width parameter")
    p.add_argument("--beta", type=float, help="relative width: sigma = beta/sqrt(2 pi) * q")


def _add_chi(p):
    _add_ring(p)
    _add_gauss(p)
    p.add_argument("--chi-file", metavar="PATH", help="JSON array with the non-uniform law")
    p.add_argument("--uniform-chi", action="store_true", help="compare uniform against itself")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = _Parser(prog="smearing", description="Smearing probabilities and the smearing attack on PLWE.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    subs = {}

    p = sub.add_parser("prob", help="exact smearing probabilities P(m, q)")
    p.add_argument("--q", type=int)
    p.add_argument("--q-max", type=int, help="emit the uniform grid for q = 1..Q")
    p.add_argument("--m-min", type=int, default=1)
    p.add_argument("--m-max", type=int, required=False)
    p.add_argument("--approx", action="store_true", help="add the Erdos-Renyi column")
    p.add_argument("--mc-trials", type=int, default=0, help="add a Monte Carlo column")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int)
    p.add_argument("--f", type=_int_list)
    p.add_argument("--negacyclic", action="store_true")
    p.add_argument("--gamma", type=int)
    _add_gauss(p)
    p.add_argument("--chi-file", metavar="PATH")
    _add_output(p)
    subs["prob"] = p

    p = sub.add_parser("curves", help="P_U and P_chi against m, and the single-trial decision accuracy")
    _add_chi(p)
    p.add_argument("--m-max", type=int, default=400)
    _add_output(p)
    subs["curves"] = p

    p = sub.add_parser("mapdist", help="coefficient Gaussian and the law of e(gamma)")
    _add_ring(p)
    _add_gauss(p)
    p.add_argument("--uniform-base", action="store_true")
    p.add_argument("--mc-samples", type=int, default=0)
    p.add_argument("--mc-out", metavar="PATH", help="histogram CSV of the Monte Carlo check")
    p.add_argument("--seed", type=int, default=0)
    _add_output(p)
    subs["mapdist"] = p

    p = sub.add_parser("params", help="choose m and N for the smearing decision")
    _add_chi(p)
    p.add_argument("--p-u", type=float)
    p.add_argument("--p-chi", type=float)
    p.add_argument("--alpha", type=float, default=0.001, help="target Type-1 error")
    p.add_argument("--beta-err", type=float, default=0.001, help="target Type-2 error")
    p.add_argument("--m-cap", type=int, default=2000)
    _add_output(p)
    subs["params"] = p

    p = sub.add_parser("samples", help="write PLWE or uniform samples to a file")
    _add_ring(p)
    _add_gauss(p)
    p.add_argument("--mode", choices=["plwe", "uniform"], default="plwe")
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--secret", type=_int_list)
    p.add_argument("--seed", type=int, default=0)
    _add_output(p)
    subs["samples"] = p

    p = sub.add_parser("attack", help="run the smearing attack")
    _add_ring(p)
    _add_gauss(p)
    p.add_argument("--mode", choices=["plwe", "uniform", "file"], default="plwe")
    p.add_argument("--samples", metavar="PATH", help="sample file for --mode file")
    p.add_argument("--secret", type=_int_list)
    p.add_argument("--auto-params", action="store_true")
    p.add_argument("--m", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--alpha", type=float, default=0.001)
    p.add_argument("--beta-err", type=float, default=0.001)
    p.add_argument("--m-cap", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    _add_output(p)
    subs["attack"] = p
    return parser, subs


COMMANDS = {
    "prob": cmd_prob,
    "curves": cmd_curves,
    "mapdist": cmd_mapdist,
    "params": cmd_params,
    "samples": cmd_samples,
    "attack": cmd_attack,
}


def main(argv=None) -> int:
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.config:
            loaded = load_config(args.config)
            known = {a.dest for a in subs[args.command]._actions}
            subs[args.command].set_defaults(**{k: v for k, v in loaded.items() if k in known and k != "command"})
            args = parser.parse_args(argv)
        cfg = vars(args)
        return COMMANDS[args.command](cfg)
    except (UsageError, SmearingError, ValueError, OSError) as exc:
        print(f"smearing {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
