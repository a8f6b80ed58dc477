"""Saturated-tower survey: classify elements zeta_{p^r}^u a^(m/p^s), record
exact heights and the observed height gap, run the tower invariant suite,
scan curves, and emit byte-stable JSON/text reports."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .elliptic import EcPoint, EllipticCurve, supersingular_scan, torsion_scan
from .equidist import bernoulli_uniformity, gauss_statistic, suz_torsion_average
from .errors import ValidationError
from .gmheights import SatElement, sat_membership
from .kummer import TowerLevel, sample_metric_gaps, sigma_action, subfield_rule, tower_degree
from .ntheight import gamma_sat_check, nt_height
from .numkernel import factorint, is_prime
from .padics import lambda_exponent, vp

SCHEMA_VERSION = "1"


def fmt(x) -> str:
    """Floats rendered with 12 significant digits (byte-stable reports)."""
    return f"{float(x):.12g}"


@dataclass(frozen=True)
class CurveSpec:
    A: Fraction
    B: Fraction
    points: tuple[tuple[Fraction, Fraction], ...]


@dataclass
class SurveyConfig:
    a: Fraction = Fraction(2)
    p: int = 3
    max_r: int = 3
    max_s: int = 3
    m_bound: int = 3
    u_bound: int = 4
    curves: tuple[CurveSpec, ...] = (
        CurveSpec(Fraction(0), Fraction(-2), ((Fraction(3), Fraction(5)),)),
        CurveSpec(Fraction(4), Fraction(0), ((Fraction(2), Fraction(4)),)),
        CurveSpec(Fraction(1), Fraction(1), ((Fraction(0), Fraction(1)),)),
    )
    ss_pmax: int = 60
    torsion_xbound: int = 20
    depth_series: int = 12
    depth_limit: int = 14
    metric_samples: int = 100
    membership_bound: int = 30
    seed: int = 20240811
    height_tol: float = 1e-9
    mode_tol: float = 1e-4

    def validate(self):
        if self.a in (0, 1, -1):
            raise ValidationError("config field 'a': base must avoid {0, 1, -1}")
        if self.p == 2 or not is_prime(self.p):
            raise ValidationError("config field 'p': need an odd prime")
        for name in ("max_r", "max_s", "m_bound", "u_bound", "ss_pmax",
                     "torsion_xbound", "depth_series", "depth_limit",
                     "metric_samples", "membership_bound"):
            if getattr(self, name) < 0:
                raise ValidationError(f"config field '{name}': must be >= 0")
        for spec in self.curves:
            E = EllipticCurve.make(spec.A, spec.B)
            for x, y in spec.points:
                E.point(x, y)
        return self


def _parse_curtempérature():  # pragma: no cover
    raise NotImplementedError


def _parse_curves_flat(text: str) -> tuple[CurveSpec, ...]:
    """A,B:x,y:x,y;A,B;..."""
    specs = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(":")
        A, B = (Fraction(t) for t in parts[0].split(","))
        pts = []
        for pt in parts[1:]:
            x, y = (Fraction(t) for t in pt.split(","))
            pts.append((x, y))
        specs.append(CurveSpec(A, B, tuple(pts)))
    return tuple(specs)


def load_config(path: str) -> SurveyConfig:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".json") or text.lstrip().startswith("{"):
        raw = json.loads(text)
        curves = []
        for c in raw.pop("curves", []):
            pts = tuple((Fraction(str(x)), Fraction(str(y))) for x, y in c.get("points", []))
            curves.append(CurveSpec(Fraction(str(c["A"])), Fraction(str(c["B"])), pts))
        cfg = SurveyConfig()
        if curves:
            cfg.curves = tuple(curves)
        for key, value in raw.items():
            _set_config_field(cfg, key, value)
        return cfg.validate()
    cfg = SurveyConfig()
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line without '=': {line!r}")
        key, value = (t.strip() for t in line.split("=", 1))
        if key == "curves":
            cfg.curves = _parse_curves_flat(value)
        else:
            _set_config_field(cfg, key, value)
    return cfg.validate()


def _set_config_field(cfg: SurveyConfig, key: str, value):
    if not hasattr(cfg, key):
        raise ValidationError(f"unknown config field {key!r}")
    current = getattr(cfg, key)
    if isinstance(current, Fraction):
        setattr(cfg, key, Fraction(str(value)))
    elif isinstance(current, int):
        setattr(cfg, key, int(value))
    elif isinstance(current, float):
        setattr(cfg, key, float(value))
    else:
        raise ValidationError(f"config field {key!r} cannot be set from flat text")


def config_record(cfg: SurveyConfig) -> dict:
    return {
        "a": str(cfg.a),
        "p": cfg.p,
        "max_r": cfg.max_r,
        "max_s": cfg.max_s,
        "m_bound": cfg.m_bound,
        "u_bound": cfg.u_bound,
        "curves": [
            {
                "A": str(c.A),
                "B": str(c.B),
                "points": [[str(x), str(y)] for x, y in c.points],
            }
            for c in cfg.curves
        ],
        "ss_pmax": cfg.ss_pmax,
        "torsion_xbound": cfg.torsion_xbound,
        "depth_series": cfg.depth_series,
        "depth_limit": cfg.depth_limit,
        "metric_samples": cfg.metric_samples,
        "membership_bound": cfg.membership_bound,
        "seed": cfg.seed,
        "height_tol": fmt(cfg.height_tol),
        "mode_tol": fmt(cfg.mode_tol),
    }


# ---------------------------------------------------------------------------
# survey sections


def _rational_lambda(a: Fraction, p: int) -> tuple[int, Fraction]:
    """Largest k with a = a0^(p^k) for rational a0 (exact, rational level)."""
    from .numkernel import rational_kth_root

    k = 0
    cur = a
    while True:
        root = rational_kth_root(cur, p)
        if root is None or root in (1, -1):
            break
        cur = root
        k += 1
    return k, cur


def saturated_section(cfg: SurveyConfig, rng: random.Random) -> dict:
    a, p = cfg.a, cfg.p
    lam_rat, base0 = _rational_lambda(a, p)
    lam_p, _ = lambda_exponent(a, p)
    members = []
    min_member = None
    for r in range(cfg.max_r + 1):
        u_values = range(0, min(cfg.u_bound, p**r - 1) + 1) if r > 0 else (0,)
        for u in u_values:
            for s in range(cfg.max_s + 1):
                for m in range(-cfg.m_bound, cfg.m_bound + 1):
                    e = SatElement.make(p, a, u=u, r=r, m=m, s=s)
                    key = (e.u, e.r, e.m, e.s)
                    if key != (u, r, m, s):
                        continue  # canonical representatives only
                    # realize through the rational-level reduced base
                    e_red = SatElement.make(p, base0, u=e.u, r=e.r, m=e.m * p**lam_rat, s=e.s)
                    alg, exact = e_red.realize()
                    verdict = sat_membership(alg, a, cfg.membership_bound)
                    if verdict.status != "member":
                        raise AssertionError(f"constructed element escaped <a>_sat: {e}")
                    expected = e.exact_height
                    if abs(exact.value - expected.value) > 1e-12:
                        raise AssertionError(f"height mismatch for {e}")
                    s_min = e_red.s
                    r_min = max(e_red.r, s_min)
                    rec = {
                        "u": e.u,
                        "r": e.r,
                        "m": e.m,
                        "s": e.s,
                        "degree": alg.degree,
                        "verdict": verdict.status,
                        "witness_n": verdict.n,
                        "witness_m": verdict.m,
                        "zeta_order": verdict.zeta_order,
                        "height_coeff": str(expected.coeff),
                        "height_log_arg": expected.log_arg,
                        "height": fmt(expected.value),
                        "min_level": [r_min, s_min],
                    }
                    members.append(rec)
                    if expected.value > 0 and (
                        min_member is None or expected.value < min_member[0]
                    ):
                        min_member = (expected.value, rec)
    members.sort(key=lambda t: (t["r"], t["s"], t["u"], t["m"]))

    support = set(factorint(a.numerator)) | set(factorint(a.denominator))
    fresh = [q for q in (5, 7, 11, 13, 17, 19, 23, 29) if q not in support and q != p]
    nonmembers = []
    min_nonmember = None
    for _ in range(12):
        c = rng.choice(fresh)
        u = rng.randrange(p ** min(cfg.max_r, 2)) if cfg.max_r else 0
        r = min(cfg.max_r, 2) if u else 0
        s = rng.randrange(1, cfg.max_s + 1) if cfg.max_s else 0
        m = rng.choice([k for k in range(-cfg.m_bound, cfg.m_bound + 1) if k % p != 0] or [1])
        q = Fraction(c) ** (p**s) * a**m
        theta = Fraction(u, p**r) + (Fraction(1, 2) if q < 0 else 0)
        from .gmheights import algebraic_from_parts

        alg = algebraic_from_parts(theta, abs(q), p**s)
        verdict = sat_membership(alg, a, cfg.membership_bound)
        if verdict.status != "non_member":
            raise AssertionError(f"perturbed sample {c} * zeta^{u} a^{m}/p^{s} not rejected")
        log_arg = max(abs(q.numerator), q.denominator)
        coeff = Fraction(1, p**s)
        value = float(coeff) * __import__("math").log(log_arg)
        rec = {
            "perturbation": c,
            "u": u,
            "r": r,
            "m": m,
            "s": s,
            "verdict": verdict.status,
            "reason": verdict.reason,
            "height_coeff": str(coeff),
            "height_log_arg": log_arg,
            "height": fmt(value),
        }
        nonmembers.append(rec)
        if value > 0 and (min_nonmember is None or value < min_nonmember[0]):
            min_nonmember = (value, rec)

    return {
        "base": str(a),
        "p": p,
        "lambda_rational": lam_rat,
        "lambda_padic": lam_p,
        "reduced_base": str(base0),
        "members": members,
        "member_count": len(members),
        "min_member_height": None if min_member is None else {
            "height": fmt(min_member[0]),
            "element": {k: min_member[1][k] for k in ("u", "r", "m", "s")},
        },
        "nonmember_samples": nonmembers,
        "min_nonmember_height": None if min_nonmember is None else fmt(min_nonmember[0]),
    }


def towers_section(cfg: SurveyConfig, rng: random.Random) -> list[dict]:
    out = []
    for r in range(1, cfg.max_r + 1):
        for s in range(0, min(r, cfg.max_s) + 1):
            lvl = TowerLevel.make(cfg.p, r, s, cfg.a)
            rec: dict = {
                "r": r,
                "s": s,
                "degree": tower_degree(lvl),
                "v_b": lvl.v_b,
                "lambda": lvl.lam,
            }
            if (r, s) not in {(0, 0), (1, 0)}:
                chain = []
                cur = lvl
                while (cur.r, cur.s) not in {(0, 0), (1, 0)}:
                    nxt = subfield_rule(cur)
                    chain.append(list(nxt))
                    cur = TowerLevel.make(cfg.p, nxt[0], nxt[1], cfg.a, lvl.lam, lvl.v_b)
                act = sigma_action(lvl)
                summary = sample_metric_gaps(lvl, cfg.metric_samples, rng)
                rec.update(
                    {
                        "subfield_chain": chain,
                        "sigma": {
                            "kind": act.kind,
                            "zeta_exp": act.zeta_exp,
                            "radical_pow": act.radical_pow,
                        },
                        "metric_gaps": {
                            "samples": summary.samples,
                            "ok": summary.ok,
                            "ambiguous": summary.ambiguous,
                            "fixed": summary.fixed,
                            "min_gap": None if summary.min_gap is None else str(summary.min_gap),
                            "bound": f"1/{cfg.p**3}",
                        },
                    }
                )
            out.append(rec)
    return out


def curves_section(cfg: SurveyConfig) -> list[dict]:
    out = []
    member_alphas = []
    lam_rat, base0 = _rational_lambda(cfg.a, cfg.p)
    for u, r, m, s in ((0, 0, 1, 0), (0, 0, 1, 1)):
        e = SatElement.make(cfg.p, base0, u=u, r=r, m=m * p_pow(cfg, lam_rat), s=s)
        member_alphas.append(e.realize()[0])
    for spec in cfg.curves:
        E = EllipticCurve.make(spec.A, spec.B)
        rec: dict = {
            "A": str(spec.A),
            "B": str(spec.B),
            "discriminant": str(E.discriminant),
            "supersingular": [
                {"p": q, "a_p": ap, "supersingular": ss}
                for q, ap, ss in supersingular_scan(E, cfg.ss_pmax)
            ],
            "torsion_points": [
                {"x": str(P.x), "y": str(P.y), "order": n}
                for P, n in torsion_scan(E, cfg.torsion_xbound)
            ] if E.is_integral else [],
            "points": [],
            "gamma_sat": [],
        }
        for x, y in spec.points:
            P = E.point(x, y)
            h1 = nt_height(E, P, "local_sum", cfg.depth_series)
            prec: dict = {
                "x": str(x),
                "y": str(y),
                "torsion_order": h1.torsion_order,
                "local_sum": fmt(h1.value),
            }
            if h1.torsion_order is None:
                h2 = nt_height(E, P, "limit", cfg.depth_limit)
                prec["limit"] = fmt(h2.value)
                prec["modes_agree"] = bool(abs(h1.value - h2.value) <= cfg.mode_tol)
                prec["breakdown"] = {
                    str(place): {
                        "value": fmt(entry.value),
                        "method": entry.method,
                        "coeff": None if entry.exact_coeff is None else str(entry.exact_coeff),
                    }
                    for place, entry in sorted(
                        h1.breakdown.entries.items(), key=lambda kv: str(kv[0])
                    )
                }
            rec["points"].append(prec)
            gv = gamma_sat_check(member_alphas, E, P, cfg.a, cfg.membership_bound)
            rec["gamma_sat"].append(
                {
                    "alphas": ["a", f"a^(1/{cfg.p})"],
                    "point": [str(x), str(y)],
                    "status": gv.status,
                    "witness_m": gv.m,
                    "torsion_order": gv.torsion_order,
                }
            )
        out.append(rec)
    return out


def p_pow(cfg: SurveyConfig, lam_rat: int) -> int:
    return cfg.p**lam_rat


def statistics_section(cfg: SurveyConfig) -> dict:
    gauss = []
    for n in range(0, 7):
        s = gauss_statistic(cfg.a, cfg.p, n)
        gauss.append(
            {
                "n": n,
                "conjugates": s.sample_count,
                "value": fmt(s.value),
                "exact_exponent": str(s.exact_exponent),
                "limit": fmt(s.theoretical_limit),
            }
        )
    bern = []
    for N in (1, 2, 5, 10, 50):
        v = bernoulli_uniformity([Fraction(j, N) for j in range(N)])
        bern.append({"N": N, "average": str(v), "closed_form": f"1/{6 * N * N}"})
    suz = []
    if cfg.curves:
        E = EllipticCurve.make(cfg.curves[0].A, cfg.curves[0].B)
        for N in (3, 5, 7, 11):
            s = suz_torsion_average(E, N, cap=5.0, depth=min(cfg.depth_series, 10))
            suz.append(
                {
                    "N": N,
                    "points": s.sample_count,
                    "average": fmt(s.value),
                    "limit": fmt(s.theoretical_limit),
                }
            )
    return {"gauss": gauss, "bernoulli": bern, "suz": suz}


def run_survey(cfg: SurveyConfig) -> dict:
    cfg.validate()
    rng = random.Random(cfg.seed)
    report = {
        "schema_version": SCHEMA_VERSION,
        "kind": "survey_report",
        "config": config_record(cfg),
        "saturated_elements": saturated_section(cfg, rng),
        "towers": towers_section(cfg, rng),
        "curves": curves_section(cfg),
        "statistics": statistics_section(cfg),
    }
    return report


def render_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def render_text(report: dict) -> str:
    lines = []
    add = lines.append
    cfg = report["config"]
    add(f"survey report (schema {report['schema_version']})")
    add(f"  base a = {cfg['a']}, p = {cfg['p']}, seed = {cfg['seed']}")
    sat = report["saturated_elements"]
    add("")
    add(f"saturated elements over <{sat['base']}>_sat,{sat['p']}  "
        f"({sat['member_count']} members, lambda = {sat['lambda_padic']})")
    add("     u  r   m  s   deg  verdict     n    m     height")
    for recm in sat["members"]:
        add(
            f"  {recm['u']:>4} {recm['r']:>2} {recm['m']:>3} {recm['s']:>2} "
            f"{recm['degree']:>5}  {recm['verdict']:<10} {recm['witness_n']:>3} "
            f"{str(recm['witness_m']):>4}   {recm['height']}"
        )
    if sat["min_member_height"]:
        add(f"  min nonzero member height: {sat['min_member_height']['height']}")
    add(f"  min sampled non-member height: {sat['min_nonmember_height']}")
    add("")
    add("towers")
    for t in report["towers"]:
        line = f"  ({t['r']},{t['s']}) degree {t['degree']}"
        if "metric_gaps" in t:
            mg = t["metric_gaps"]
            line += (
                f"  sigma={t['sigma']['kind']:<10} gaps ok {mg['ok']}/{mg['samples']}"
                f" ambiguous {mg['ambiguous']} min_gap {mg['min_gap']} (bound {mg['bound']})"
            )
        add(line)
    add("")
    for c in report["curves"]:
        add(f"curve y^2 = x^3 + {c['A']}x + {c['B']}  (disc {c['discriminant']})")
        ss = [str(row["p"]) for row in c["supersingular"] if row["supersingular"]]
        add(f"  supersingular p <= {cfg['ss_pmax']}: {', '.join(ss) if ss else 'none'}")
        add(f"  torsion points found: {len(c['torsion_points'])}")
        for pt in c["points"]:
            if pt["torsion_order"] is not None:
                add(f"  point ({pt['x']}, {pt['y']}): torsion of order {pt['torsion_order']}, height 0")
            else:
                add(
                    f"  point ({pt['x']}, {pt['y']}): local_sum {pt['local_sum']}"
                    f"  limit {pt['limit']}  agree={pt['modes_agree']}"
                )
        for g in c["gamma_sat"]:
            add(f"  gamma_sat {g['alphas']} x ({g['point'][0]},{g['point'][1]}): "
                f"{g['status']} (m = {g['witness_m']})")
        add("")
    st = report["statistics"]
    add("gauss statistic (limit 1):")
    for row in st["gauss"]:
        add(f"  n={row['n']}: {row['value']}  (p^{row['exact_exponent']})")
    add("bernoulli averages (limit 0):")
    for row in st["bernoulli"]:
        add(f"  N={row['N']}: {row['average']} = {row['closed_form']}")
    if st["suz"]:
        add("torsion-packet averages (limit 0):")
        for row in st["suz"]:
            add(f"  N={row['N']} ({row['points']} points): {row['average']}")
    return "\n".join(lines) + "\n"
