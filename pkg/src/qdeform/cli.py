"""Command-line front end: ``qdeform run <suite>`` and ``qdeform enumerate-cocycles``."""
from __future__ import annotations

import argparse
import json
import sys
import zlib
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from . import deform as D
from .cocycles import (
    CocycleError,
    DualCocycle,
    bicharacter_cocycle,
    coboundary_twist,
    enumerate_bicharacters,
    format_bicharacter,
    load_cocycle,
    random_unitary_in_mhat,
    trivial_cocycle,
    verify_cocycle,
)
from .fqg import FiniteGroup, FiniteQuantumGroup, GroupError, function_algebra, group_algebra, load_group
from .kahlerian import DEFAULT_BOX, TOL_KAHLER, KernelOverflowError, TauError, kahlerian_report
from .report import SCHEMA_VERSION, Report, dumps, table
from .tensorkit import TOL_IDENTITY, TOL_SPAN, opnorm, place
from .twisted import build_twisted_algebra, fourier_report, lambda_relation_defect, quantization_report, regularity_check

SUITES = ("pentagon", "cocycle", "twisted", "deform", "theorems", "stages", "cohomology", "kahlerian")
COBOUNDARY_DRAWS = 100

# shipped groups and the non-trivial cocycles shipped with each
CATALOG: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("z2.grp", ("z2-psi.coc",)),
    ("z3.grp", ("z3-psi.coc",)),
    ("z4.grp", ("z4-psi.coc",)),
    ("z2xz2.grp", ("sigma.coc",)),
    ("s3.grp", ()),
)


class InputError(Exception):
    """Bad command-line input; maps to exit code 2."""


def data_path(name: str) -> Path:
    return Path(str(resources.files("qdeform") / "data" / name))


def _resolve(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    shipped = data_path(path)
    if shipped.exists():
        return shipped
    raise InputError(f"cannot read {path!r}")


@dataclass
class Case:
    """One quantum group with the cocycles and system presets to run on it."""

    group_name: str
    q: FiniteQuantumGroup
    cocycles: list[DualCocycle]
    presets: list[str]
    skipped: list[str] = field(default_factory=list)

    @property
    def label(self) -> str:
        return f"{self.group_name}:{self.q.kind}"


@dataclass
class Settings:
    seed: int = 0
    tol_identity: float = TOL_IDENTITY
    tol_span: float = TOL_SPAN
    d: int | None = None
    theta: float = 1.0
    samples: int = 10_000
    box: float = DEFAULT_BOX
    suites: tuple[str, ...] = SUITES

    def rng(self, label: str) -> np.random.Generator:
        # stream keyed by a stable hash of the label, independent of run order
        return np.random.default_rng([self.seed, zlib.crc32(label.encode())])

    def environment(self) -> dict:
        return {
            "seed": self.seed,
            "tolerances": {"identity": self.tol_identity, "span": self.tol_span, "kahlerian": TOL_KAHLER},
            "version": __version__,
        }


def _quantum_group(g: FiniteGroup, kind: str) -> FiniteQuantumGroup:
    return group_algebra(g) if kind == "group-algebra" else function_algebra(g)


def _presets_for(q: FiniteQuantumGroup) -> tuple[list[str], list[str]]:
    keep = [p for p in D.PRESETS if q.n <= D.PRESET_MAX_ORDER[p]]
    return keep, [p for p in D.PRESETS if p not in keep]


def build_cases(args: argparse.Namespace) -> list[Case]:
    spec = None
    if args.system:
        try:
            spec = D.load_system(_resolve(args.system))
        except ValueError as e:
            raise InputError(f"system file: {e}") from None
    group_file = args.group or (str(spec.group) if spec and spec.group else None)
    cocycle_file = args.cocycle or (str(spec.cocycle) if spec and spec.cocycle else None)
    kind = args.kind or (spec.kind if spec else None)
    try:
        if group_file is None:
            if cocycle_file:
                raise InputError("--cocycle needs --group")
            cases = []
            for gfile, cfiles in CATALOG:
                g = load_group(data_path(gfile))
                for k in ([kind] if kind else ["group-algebra", "function-algebra"]):
                    q = _quantum_group(g, k)
                    # scalar cocycles live on the dual of a group algebra
                    extra = [load_cocycle(data_path(f), q) for f in cfiles] if k == "group-algebra" else []
                    presets, skipped = _presets_for(q)
                    if spec:
                        presets, skipped = [spec.preset], []
                    if k == "function-algebra" and g.is_abelian:
                        presets, skipped = [], []  # same quantum groups as the group-algebra side
                    cases.append(Case(g.name, q, [trivial_cocycle(q)] + extra, presets, skipped))
            return cases
        g = load_group(_resolve(group_file))
        q = _quantum_group(g, kind or "group-algebra")
        cocs = [load_cocycle(_resolve(cocycle_file), q)] if cocycle_file else [trivial_cocycle(q)]
        if spec:
            presets, skipped = [spec.preset], []
        else:
            presets, skipped = _presets_for(q)
        return [Case(g.name, q, cocs, presets, skipped)]
    except (GroupError, CocycleError, OSError) as e:
        raise InputError(str(e)) from None


# ---------------------------------------------------------------------------
# suites


def suite_pentagon(case: Case, st: Settings) -> list[Report]:
    q, n = case.q, case.q.n
    dims = [n] * 3
    r = Report(f"pentagon[{case.label}]")
    for name, u in (("W", q.W), ("W_hat", q.W_hat), ("V", q.V)):
        defect = opnorm(place(u, [0, 1], dims) @ place(u, [0, 2], dims) @ place(u, [1, 2], dims)
                        - place(u, [1, 2], dims) @ place(u, [0, 1], dims))
        r.add(f"pentagon {name}", "U12 U13 U23 = U23 U12", defect, st.tol_identity)
    return [r]


def _max_merge(r: Report, reports: list[Report]) -> None:
    """Record the worst defect per check name across repeated reports."""
    worst: dict[str, tuple[str, float, float]] = {}
    for rep in reports:
        for c in rep.checks:
            prev = worst.get(c.name)
            if prev is None or not (c.defect <= prev[1]):
                worst[c.name] = (c.anchor, c.defect, c.tolerance)
    for name, (anchor, defect, tol) in worst.items():
        r.add(name, anchor, defect, tol)


def suite_cocycle(case: Case, st: Settings) -> list[Report]:
    q = case.q
    out = []
    if q.kind == "group_algebra" and q.group.is_abelian:
        bichars = enumerate_bicharacters(q.group)
        r = Report(f"bicharacters[{case.group_name}]")
        reps = [verify_cocycle(bicharacter_cocycle(q, psi, f"b{k}"), st.tol_identity, st.tol_span)
                for k, psi in enumerate(bichars)]
        _max_merge(r, reps)
        r.notes["count"] = len(bichars)
        out.append(r)
    for c in case.cocycles:
        out.append(verify_cocycle(c, st.tol_identity, st.tol_span))
        out.append(build_twisted_algebra(c).data.report(st.tol_identity, st.tol_span))
        rng = st.rng(f"coboundary:{case.label}:{c.label}")
        r = Report(f"coboundaries[{case.label},{c.label}]")
        reps = []
        for _ in range(COBOUNDARY_DRAWS):
            u = random_unitary_in_mhat(q, rng)
            cu = coboundary_twist(c, u)
            rep = verify_cocycle(cu, st.tol_identity, st.tol_span)
            back = coboundary_twist(cu, u.conj().T)
            rep.add("untwist", "(Omega_u)_(u*) = Omega", opnorm(back.omega - c.omega), st.tol_identity)
            reps.append(rep)
        _max_merge(r, reps)
        r.notes["draws"] = COBOUNDARY_DRAWS
        out.append(r)
    return out


def suite_twisted(case: Case, st: Settings) -> list[Report]:
    out = []
    for c in case.cocycles:
        t = build_twisted_algebra(c)
        rep = t.report(st.tol_identity, st.tol_span)
        rep.notes["dim"] = t.span.dim
        rep.notes["center_dim"] = t.span.center_dim()
        out += [rep, quantization_report(t, st.tol_identity, st.tol_span), regularity_check(t, st.tol_span)]
        if case.q.kind == "group_algebra":
            # Fourier picture: functions on the group read as functionals on its dual
            rep.add("lambda relation", "lambda^Omega_st = Omega(s,t) lambda^Omega_s lambda^Omega_t",
                    lambda_relation_defect(t), st.tol_identity)
            out.append(fourier_report(t, st.tol_identity, st.tol_span))
    return out


def _pairs(case: Case):
    for c in case.cocycles:
        t = build_twisted_algebra(c)
        for p in case.presets:
            yield c, t, p


def suite_deform(case: Case, st: Settings) -> list[Report]:
    out = []
    for c, t, p in _pairs(case):
        s = D.make_preset(p, case.q)
        d = D.deform(s, c, t)
        fp = D.fixed_point_algebra(d, st.tol_identity, st.tol_span)
        out += [s.report(st.tol_identity, st.tol_span), D.crossed_product(s).report(st.tol_identity, st.tol_span),
                d.report(st.tol_identity, st.tol_span), fp.report]
    return out


def suite_theorems(case: Case, st: Settings) -> list[Report]:
    out = []
    for c, t, p in _pairs(case):
        s = D.make_preset(p, case.q)
        d = D.deform(s, c, t)
        out += [D.verify_ttwisted(d, st.tol_identity, st.tol_span), D.verify_tva(d, st.tol_identity, st.tol_span)]
        if p in D.OP_PRESETS:
            ops = D.OP_PRESETS[p](case.q)
            out += [ops.report(st.tol_identity, st.tol_span),
                    D.twisted_crossed_product(ops, c, t).report(st.tol_identity, st.tol_span),
                    D.verify_dual_action_case(ops, c, t, st.tol_identity, st.tol_span)]
    return out


def suite_stages(case: Case, st: Settings) -> list[Report]:
    out = []
    for c, t, p in _pairs(case):
        s = D.make_preset(p, case.q)
        out.append(D.verify_round_trip(s, c, D.deform(s, c, t), st.tol_identity, st.tol_span))
    return out


def suite_cohomology(case: Case, st: Settings) -> list[Report]:
    out = []
    for c, t, p in _pairs(case):
        s = D.make_preset(p, case.q)
        d = D.deform(s, c, t)
        rng = st.rng(f"cohomology:{case.label}:{c.label}:{p}")
        reps = [D.verify_cohomology_invariance(s, c, random_unitary_in_mhat(case.q, rng), d, st.tol_identity, st.tol_span)
                for _ in range(COBOUNDARY_DRAWS)]
        r = Report(f"cohomology[{s.name},{c.label}]")
        _max_merge(r, reps)
        r.notes["draws"] = COBOUNDARY_DRAWS
        out.append(r)
    return out


def suite_kahlerian(st: Settings) -> list[Report]:
    ds = [st.d] if st.d is not None else [0, 1]
    return [kahlerian_report(d, st.theta, st.samples, st.seed, st.box) for d in ds]


CASE_SUITES = {
    "pentagon": suite_pentagon,
    "cocycle": suite_cocycle,
    "twisted": suite_twisted,
    "deform": suite_deform,
    "theorems": suite_theorems,
    "stages": suite_stages,
    "cohomology": suite_cohomology,
}


def run_suite(name: str, cases: list[Case], st: Settings) -> list[Report]:
    if name == "kahlerian":
        return suite_kahlerian(st)
    out = []
    for case in cases:
        out += CASE_SUITES[name](case, st)
    return out


def run(suite: str, cases: list[Case], st: Settings, strict: bool = False) -> dict:
    names = [s for s in SUITES if s in st.suites] if suite == "all" else [suite]
    doc_suites = []
    for name in names:
        reports = run_suite(name, cases, st)
        doc_suites.append({"suite": name, "pass": all(r.passed for r in reports),
                           "reports": [r.as_dict() for r in reports]})
    skipped = sorted({f"{c.label}:{p}" for c in cases for p in c.skipped})
    ok = all(s["pass"] for s in doc_suites)
    if strict:
        ok = ok and not skipped and all(s["reports"] for s in doc_suites)
    return {
        "schema": SCHEMA_VERSION,
        "suite": suite,
        "pass": ok,
        "skipped": skipped,
        "suites": doc_suites,
        "environment": st.environment(),
    }


def render_table(doc: dict) -> str:
    parts = []
    for s in doc["suites"]:
        reps = []
        for rd in s["reports"]:
            r = Report(rd["suite"], notes=rd["notes"])
            for c in rd["checks"]:
                r.add(c["name"], c["paper_anchor"], c["defect"], c["tolerance"])
            reps.append(r)
        parts.append(table(reps))
    if doc["skipped"]:
        parts.append("skipped (size limits): " + ", ".join(doc["skipped"]))
    parts.append(f"overall: {'PASS' if doc['pass'] else 'FAIL'}")
    return "\n".join(parts)


# ---------------------------------------------------------------------------
# enumeration


def enumerate_cocycles(group_file: str, out_dir: str | None = None) -> dict:
    try:
        g = load_group(_resolve(group_file))
        bichars = enumerate_bicharacters(g)
    except (GroupError, CocycleError, OSError) as e:
        raise InputError(str(e)) from None
    listing = []
    for k, psi in enumerate(bichars):
        name = f"{g.name.lower()}-b{k}"
        text = format_bicharacter(psi, name)
        listing.append({"name": name, "symmetric": bool(np.allclose(psi, psi.T)), "file": text})
        if out_dir:
            Path(out_dir).mkdir(parents=True, exist_ok=True)
            (Path(out_dir) / f"{name}.coc").write_text(text)
    return {"schema": SCHEMA_VERSION, "group": g.name, "kind": "bicharacter", "count": len(bichars),
            "cocycles": listing}


# ---------------------------------------------------------------------------
# argument handling


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qdeform", description="Verify cocycle deformations of finite quantum groups.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a verification suite")
    r.add_argument("suite", choices=SUITES + ("all",))
    r.add_argument("--group", help="group file (default: the shipped catalog)")
    r.add_argument("--cocycle", help="cocycle file on the dual of the group algebra")
    r.add_argument("--system", help="system file naming a preset")
    r.add_argument("--kind", choices=("group-algebra", "function-algebra"))
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--tol-identity", type=float, default=TOL_IDENTITY)
    r.add_argument("--tol-span", type=float, default=TOL_SPAN)
    r.add_argument("--strict", action="store_true", help="also fail on skipped pairs and empty suites")
    fmt = r.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json")
    fmt.add_argument("--table", dest="fmt", action="store_const", const="table")
    r.add_argument("--d", type=int, default=None, help="half-dimension for the kahlerian suite (default: 0 and 1)")
    r.add_argument("--theta", type=float, default=1.0)
    r.add_argument("--samples", type=int, default=10_000)
    r.add_argument("--box", type=float, default=DEFAULT_BOX)

    e = sub.add_parser("enumerate-cocycles", help="list all bicharacter cocycles of an abelian group")
    e.add_argument("group")
    e.add_argument("--kind", choices=("bicharacter",), default="bicharacter")
    e.add_argument("--out", help="directory to write one cocycle file per bicharacter")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "enumerate-cocycles":
            print(json.dumps(enumerate_cocycles(args.group, args.out), indent=1, sort_keys=True))
            return 0
        if args.d is not None and args.d < 0:
            raise InputError("--d must be non-negative")
        if args.tol_identity < 0 or args.tol_span < 0:
            raise InputError("tolerances must be non-negative")
        if args.theta == 0 or args.samples <= 0 or args.box <= 0:
            raise InputError("--theta must be nonzero, --samples and --box positive")
        st = Settings(args.seed, args.tol_identity, args.tol_span, args.d, args.theta, args.samples, args.box)
        if args.system:
            spec = D.load_system(_resolve(args.system))
            if spec.verifiers:
                unknown = set(spec.verifiers) - set(SUITES)
                if unknown:
                    raise InputError(f"unknown verifiers in system file: {sorted(unknown)}")
                st.suites = tuple(spec.verifiers)
        cases = [] if args.suite == "kahlerian" else build_cases(args)
        doc = run(args.suite, cases, st, args.strict)
    except InputError as e:
        print(f"qdeform: error: {e}", file=sys.stderr)
        return 2
    except (ValueError, TauError, KernelOverflowError) as e:
        print(f"qdeform: error: {e}", file=sys.stderr)
        return 2
    print(render_table(doc) if args.fmt == "table" else dumps(doc))
    return 0 if doc["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
