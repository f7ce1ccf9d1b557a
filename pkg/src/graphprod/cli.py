"""Command line interface: JSON configs in, JSON reports out.

This module also owns the word grammar shared by configs, reports, and
fixtures: whitespace-separated atoms, where an atom is a generator name, a
parenthesized subword, or either followed by an integer exponent, e.g.
"(b a)^2 c^-1".  Ambiguous generator names can be qualified by vertex as
"v2.g".  Basis elements are spelled x1, x2, ... in the same grammar.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .ctgroups import ct_report
from .finitegroup import FiniteGroup, abelian, cyclic, from_table, permutation_group, symmetric
from .kernel import (
    DEFAULT_COSET_BOUND,
    DEFAULT_TIETZE_BUDGET,
    BudgetExceeded,
    KernelRealization,
    realize_kernel,
    validate_basis,
)
from .monodromy import (
    DEFAULT_CLOSURE_BUDGET,
    ROW_CONVENTION,
    build_monodromy,
    h1_image_check,
    homology_trace_check,
    ia_check,
    sl_gl_classify,
    verify_faithful,
)
from .presentation import (
    EMPTY_WORD,
    GraphProductPresentation,
    Letter,
    Word,
    build_graph_product,
    commutator_basis,
    word_str,
)
from .simplicial import SimplicialComplex, from_facets, rank_rho
from .zlinalg import IntMatrix, mat_mul, matrix_group_order

_TOKEN_RE = re.compile(r"\(|\)|\^-?\d+|[A-Za-z][A-Za-z0-9._]*|1")


def _tokenize(text: str) -> list[str]:
    tokens: list[str] = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ValueError(f"bad character {text[pos]!r} in word {text!r}")
        tokens.append(m.group())
        pos = m.end()
    return tokens


def _parse_tokens(tokens: list[str], at: int, resolve, depth: int):
    """Parse a sequence of atoms until ')' or end; returns (word, position)."""
    out: list = []
    while at < len(tokens):
        tok = tokens[at]
        if tok == ")":
            if depth == 0:
                raise ValueError("unbalanced ')'")
            return out, at
        if tok == "(":
            inner, at = _parse_tokens(tokens, at + 1, resolve, depth + 1)
            if at >= len(tokens) or tokens[at] != ")":
                raise ValueError("unbalanced '('")
            at += 1
            atom = inner
        elif tok.startswith("^"):
            raise ValueError(f"exponent {tok!r} with nothing to apply it to")
        else:
            atom = resolve(tok)
            at += 1
        if at < len(tokens) and tokens[at].startswith("^"):
            k = int(tokens[at][1:])
            at += 1
        else:
            k = 1
        if k < 0:
            atom = [_invert_symbol(s) for s in reversed(atom)]
            k = -k
        out.extend(atom * k)
    return out, at


def _invert_symbol(s):
    if isinstance(s, Letter):
        return s.inverse()
    sym, sign = s
    return (sym, -sign)


def _parse(text: str, resolve) -> tuple:
    tokens = _tokenize(text)
    word, at = _parse_tokens(tokens, 0, resolve, 0)
    if at != len(tokens):
        raise ValueError(f"trailing tokens in word {text!r}")
    return tuple(word)


_QUALIFIED_RE = re.compile(r"^v(\d+)\.(.+)$")


def parse_word(text: str, pres: GraphProductPresentation) -> Word:
    """Word over the presentation generators; '1' is the empty word."""
    by_name = pres.letter_of_name()

    def resolve(name: str) -> list[Letter]:
        if name == "1":
            return []
        letter = by_name.get(name)
        if letter is not None:
            return [letter]
        m = _QUALIFIED_RE.match(name)
        if m:
            v = int(m.group(1))
            if 1 <= v <= pres.n:
                G = pres.groups[v - 1]
                if m.group(2) in G.labels:
                    e = G.labels.index(m.group(2))
                    return [] if e == 0 else [Letter(v, e, 1)]
        raise ValueError(f"unknown generator {name!r}")

    return _parse(text, resolve)


def parse_expr(text: str) -> tuple[tuple[int, int], ...]:
    """Word over basis letters x1, x2, ...; '1' is the empty word."""

    def resolve(name: str):
        if name == "1":
            return []
        if name.startswith("x") and name[1:].isdigit() and int(name[1:]) >= 1:
            return [(int(name[1:]), 1)]
        raise ValueError(f"unknown basis letter {name!r}")

    return _parse(text, resolve)


def format_expr(e: tuple[tuple[int, int], ...]) -> str:
    if not e:
        return "1"
    return " ".join(f"x{sym}" if sign > 0 else f"x{sym}^-1" for sym, sign in e)


# --- run configuration ---

TASK_NAMES = (
    "rank",
    "basis",
    "aut",
    "matrices",
    "verify",
    "homology-check",
    "h1-check",
    "ct-report",
)
# tasks that require the realized kernel pipeline
_KERNEL_TASKS = frozenset(TASK_NAMES[:-1])
_BASIS_TASKS = frozenset(("basis", "aut", "matrices", "verify", "homology-check"))
_REP_TASKS = frozenset(("aut", "matrices", "verify", "homology-check"))

_OPTION_DEFAULTS = {
    "matrix_convention": ROW_CONVENTION,
    "basis_rule": "example-matching",
    "closure_budget": DEFAULT_CLOSURE_BUDGET,
    "coset_bound": DEFAULT_COSET_BOUND,
    "tietze_budget": DEFAULT_TIETZE_BUDGET,
}


def build_group(spec: dict) -> FiniteGroup:
    if not isinstance(spec, dict) or "type" not in spec:
        raise ValueError(f"group spec must be an object with a 'type': {spec!r}")
    kind = spec["type"]
    if kind == "cyclic":
        return cyclic(int(spec["order"]))
    if kind == "symmetric":
        return symmetric(int(spec["degree"]))
    if kind == "abelian":
        return abelian([int(f) for f in spec["factors"]])
    if kind == "permutation":
        return permutation_group(int(spec["degree"]), spec["generators"])
    if kind == "table":
        return from_table(spec["elements"], spec["table"])
    raise ValueError(f"unknown group type {kind!r}")


@dataclass(frozen=True)
class RunConfig:
    groups: tuple[FiniteGroup, ...]
    complex: SimplicialComplex
    basis_texts: tuple[str, ...] | None
    tasks: tuple[str, ...]
    options: dict
    echo: dict


def parse_config(data: dict) -> RunConfig:
    """Validate a raw config object; raises ValueError with the reason."""
    if not isinstance(data, dict):
        raise ValueError("config must be a JSON object")
    unknown = set(data) - {"groups", "complex", "basis", "tasks", "options"}
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    group_specs = data.get("groups")
    if not group_specs:
        raise ValueError("config needs a non-empty 'groups' list")
    groups = tuple(build_group(s) for s in group_specs)
    cx = data.get("complex")
    if not isinstance(cx, dict) or "vertices" not in cx:
        raise ValueError("config needs 'complex' with 'vertices' and 'facets'")
    n = int(cx["vertices"])
    if n != len(groups):
        raise ValueError(
            f"vertex count {n} does not match {len(groups)} group specs"
        )
    K = from_facets(n, cx.get("facets", []))
    basis = data.get("basis")
    if basis is not None:
        if not isinstance(basis, list) or not all(isinstance(b, str) for b in basis):
            raise ValueError("'basis' must be a list of words")
        basis = tuple(basis)
    tasks = data.get("tasks")
    if not tasks:
        raise ValueError("config needs a non-empty 'tasks' list")
    bad = [t for t in tasks if t not in TASK_NAMES]
    if bad:
        raise ValueError(f"unknown tasks {bad}; valid: {list(TASK_NAMES)}")
    options = dict(_OPTION_DEFAULTS)
    given = data.get("options", {})
    unknown = set(given) - set(options)
    if unknown:
        raise ValueError(f"unknown options: {sorted(unknown)}")
    options.update(given)
    if options["matrix_convention"] != ROW_CONVENTION:
        raise ValueError(
            f"unsupported matrix convention {options['matrix_convention']!r}; "
            f"only {ROW_CONVENTION!r} is implemented"
        )
    echo = {
        "groups": group_specs,
        "complex": {"vertices": n, "facets": cx.get("facets", [])},
        "tasks": list(tasks),
        "options": dict(options),
    }
    if basis is not None:
        echo["basis"] = list(basis)
    return RunConfig(groups, K, basis, tuple(tasks), options, echo)


def load_config(path: str | Path) -> RunConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ValueError(
            f"config parse error at line {err.lineno} column {err.colno}: {err.msg}"
        ) from err
    return parse_config(data)


# --- task execution ---


def _rank_section(config: RunConfig, real: KernelRealization) -> dict:
    orders = [g.order for g in config.groups]
    methods = {
        "euler": rank_rho(config.complex, orders, "euler"),
        "tietze": real.fp.rank,
    }
    if config.complex.is_zero_dimensional():
        methods["closed_form"] = rank_rho(config.complex, orders, "closed_form")
        methods["recursion"] = rank_rho(config.complex, orders, "recursion")
    if len(set(methods.values())) != 1:
        raise RuntimeError(f"rank methods disagree: {methods}")
    return {
        "value": str(methods["euler"]),
        "methods": {k: str(v) for k, v in methods.items()},
    }


def _matrix_rows(m: IntMatrix) -> list[list[int]]:
    return [list(row) for row in m.entries]


def _ct_section(groups: Sequence[FiniteGroup]) -> dict:
    out = {}
    for i, G in enumerate(groups, start=1):
        rep = ct_report(G)
        ranks = rep.ranks
        parity: dict = {"applicable": rep.parity.applicable}
        if rep.parity.applicable:
            parity["rank_parities"] = list(rep.parity.rank_parities)
            parity["ratios"] = [str(r) for r in rep.parity.ratios]
            parity["all_ratios_odd"] = rep.parity.all_ratios_odd
        else:
            parity["reason"] = rep.parity.reason
        out[f"v{i}"] = {
            "group_order": str(rep.group_order),
            "is_ct": rep.is_ct,
            "center_order": str(rep.center_order),
            "covering_number": str(ranks.covering_number),
            "cover_orders": [str(m) for m in ranks.cover_orders],
            "cover_kernel_rank": str(ranks.cover_kernel_rank),
            "commuting_space_rank": str(ranks.commuting_space_rank),
            "rank_gap": str(ranks.rank_gap),
            "commutator_subgroup_order": str(ranks.commutator_subgroup_order),
            "quotient_order": str(ranks.quotient_order),
            "common_subgroup_rank": str(ranks.common_subgroup_rank),
            "parity": parity,
            "solvability": {
                "perfect": rep.verdict.perfect,
                "h1_surjective": rep.verdict.h1_surjective,
                "solvable": rep.verdict.solvable,
            },
        }
    return out


def execute(config: RunConfig) -> dict:
    """Run the configured tasks in dependency order; returns the report."""
    tasks = frozenset(config.tasks)
    results: dict = {}
    real = None
    if tasks & _KERNEL_TASKS:
        real = realize_kernel(
            config.complex,
            config.groups,
            coset_bound=config.options["coset_bound"],
            tietze_budget=config.options["tietze_budget"],
        )
    basis_words: list[Word] | None = None
    basis_source = None
    if config.basis_texts is not None:
        if real is None:
            # no kernel task requested, but the config invariant still
            # demands that the words parse over the declared generators
            pres = build_graph_product(
                config.groups,
                (tuple(sorted(e)) for e in config.complex.edges()),
            )
            for t in config.basis_texts:
                parse_word(t, pres)
        else:
            basis_words = [parse_word(t, real.pres) for t in config.basis_texts]
            val = validate_basis(basis_words, real.fp)
            if not val.ok:
                raise ValueError(f"user basis rejected: {val.message}")
            basis_source = "user"
    elif tasks & _BASIS_TASKS:
        basis_words = commutator_basis(
            config.complex, config.groups, basis_rule=config.options["basis_rule"]
        )
        basis_source = "commutator-enumeration"
    rep = None
    if tasks & _REP_TASKS:
        rep = build_monodromy(
            config.complex,
            config.groups,
            basis=basis_words,
            basis_rule=config.options["basis_rule"],
            realization=real,
        )
    if "rank" in tasks:
        results["rank"] = _rank_section(config, real)
    if "basis" in tasks:
        results["basis"] = {
            "source": basis_source,
            "rank": str(len(basis_words)),
            "words": [word_str(w, config.complex.n) for w in basis_words],
        }
    if "aut" in tasks:
        results["aut"] = {
            "tables": {
                name: [format_expr(im) for im in aut.images]
                for name, aut in zip(rep.generator_names(), rep.automorphisms)
            }
        }
    if "matrices" in tasks:
        sl_gl = sl_gl_classify(rep)
        results["matrices"] = {
            "convention": rep.convention,
            "by_generator": {
                name: _matrix_rows(m)
                for name, m in zip(rep.generator_names(), rep.matrices)
            },
            "determinants": {name: d for name, d in sl_gl.determinants},
            "classification": sl_gl.overall,
        }
    if "verify" in tasks:
        report = verify_faithful(rep, budget=config.options["closure_budget"])
        results["verify"] = {
            "faithful": report.faithful,
            "image_order": str(report.image_order),
            "expected_order": str(report.expected_order),
            "witness": list(report.witness) if report.witness else None,
            "ia_intersection_trivial": ia_check(
                rep, budget=config.options["closure_budget"]
            ),
        }
    if "homology-check" in tasks:
        trace = homology_trace_check(rep, real.table)
        results["homology-check"] = {
            "h1_rank": str(trace.h1_rank),
            "torsion_free": True,
            "elements_checked": str(trace.checked),
            "all_traces_match": trace.all_match,
            "mismatches": str(len(trace.mismatches)),
        }
        if not trace.all_match:
            raise RuntimeError(
                f"trace mismatch between word and homology routes: "
                f"{trace.mismatches[:3]}"
            )
    if "h1-check" in tasks:
        image = h1_image_check(real.pres, real.fp)
        results["h1-check"] = {
            "target_factors": [[str(d) for d in f] for f in image.target_factors],
            "image_trivial": image.image_trivial,
            "surjective": image.surjective,
            "degenerate": image.degenerate,
        }
    if "ct-report" in tasks:
        results["ct-report"] = _ct_section(config.groups)
    return {"config": config.echo, "results": results}


def render_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _summarize(report: dict, err) -> None:
    results = report.get("results", {})
    if "rank" in results:
        print(f"rank: {results['rank']['value']}", file=err)
    if "basis" in results:
        b = results["basis"]
        print(f"basis: {b['rank']} words ({b['source']})", file=err)
    if "aut" in results:
        print(f"aut: {len(results['aut']['tables'])} generator actions", file=err)
    if "matrices" in results:
        m = results["matrices"]
        print(
            f"matrices: {len(m['by_generator'])} generators, {m['classification']}",
            file=err,
        )
    if "verify" in results:
        v = results["verify"]
        verdict = "faithful" if v["faithful"] else "NOT faithful"
        print(f"verify: {verdict}, image order {v['image_order']}", file=err)
    if "homology-check" in results:
        h = results["homology-check"]
        print(
            f"homology-check: H1 rank {h['h1_rank']}, "
            f"traces match for {h['elements_checked']} elements",
            file=err,
        )
    if "h1-check" in results:
        h = results["h1-check"]
        trivial = "trivial" if h["image_trivial"] else "nontrivial"
        surj = "surjective" if h["surjective"] else "not surjective"
        print(f"h1-check: image {trivial}, {surj}", file=err)
    if "ct-report" in results:
        for vname, r in results["ct-report"].items():
            verdict = "solvable" if r["solvability"]["solvable"] else "not solvable"
            print(
                f"ct-report {vname}: CT, covering number {r['covering_number']}, "
                f"{verdict}",
                file=err,
            )


# --- fixtures ---

_GOLDEN_DIR = Path(__file__).parent / "goldens"

FIXTURE_NAMES = (
    "ex3.3",
    "ex3.5",
    "ex4.1",
    "ex4.2",
    "ex4.3",
    "ct-sym3",
    "ct-c7c3",
    "ct-alt5",
)


def _fixture_matrix_orders() -> dict:
    """Signed 3x3 permutation matrices: three generate a group of order 48,
    and one shear-twisted product has order 6."""
    rotate = [[0, 0, 1], [1, 0, 0], [0, 1, 0]]
    swap = [[0, 1, 0], [1, 0, 0], [0, 0, 1]]
    shear = [[1, 1, 0], [0, 1, 0], [0, 0, 1]]
    flip = [[-1, 0, 0], [0, 1, 0], [0, 0, 1]]
    product = mat_mul(
        mat_mul(IntMatrix(flip), IntMatrix(swap)), IntMatrix(shear)
    )
    gens = [IntMatrix(rotate), IntMatrix(swap), IntMatrix(flip)]
    return {
        "results": {
            "matrix-orders": {
                "generators": [rotate, swap, flip],
                "group_order": str(matrix_group_order(gens)),
                "twisted_product": _matrix_rows(product),
                "twisted_product_order": str(matrix_group_order([product])),
                "shear": shear,
            }
        }
    }


def fixture_report(name: str) -> dict:
    if name == "ex4.3":
        return _fixture_matrix_orders()
    config = load_config(_GOLDEN_DIR / f"{name}.config.json")
    return execute(config)


def run_fixtures(filter_text: str | None = None) -> list[dict]:
    """Recompute every (filtered) fixture and compare against its golden."""
    out = []
    for name in FIXTURE_NAMES:
        if filter_text is not None and filter_text not in name:
            continue
        report = fixture_report(name)
        golden_path = _GOLDEN_DIR / f"{name}.golden.json"
        stored = golden_path.read_text(encoding="utf-8")
        if render_report(report) != stored:
            raise RuntimeError(f"fixture {name!r} diverges from stored golden")
        out.append({"name": name, "report": report})
    return out


# --- entry point ---


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="graphprod",
        description="Graph products of finite groups: free kernels, bases, "
        "matrix representations, homology cross-checks, CT group reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute one JSON config")
    p_run.add_argument("config", help="path to the config JSON file")
    p_run.add_argument("--out", help="write the JSON report to this path")
    p_run.add_argument(
        "--budget",
        type=int,
        help="override closure_budget and tietze_budget",
    )
    p_fix = sub.add_parser(
        "fixtures", help="recompute built-in examples and compare to goldens"
    )
    p_fix.add_argument("--filter", help="substring filter on fixture names")
    p_fix.add_argument("--out", help="write the JSON report list to this path")
    args = parser.parse_args(argv)
    err = sys.stderr
    try:
        if args.command == "run":
            config = load_config(args.config)
            if args.budget is not None:
                config.options["closure_budget"] = args.budget
                config.options["tietze_budget"] = args.budget
                config.echo["options"]["closure_budget"] = args.budget
                config.echo["options"]["tietze_budget"] = args.budget
            report = execute(config)
            _summarize(report, err)
            text = render_report(report)
        else:
            reports = run_fixtures(args.filter)
            for item in reports:
                print(f"fixture {item['name']}: ok", file=err)
            text = json.dumps(reports, indent=2, sort_keys=True) + "\n"
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    except OSError as e:
        print(f"error: {e}", file=err)
        return 1
    except BudgetExceeded as e:
        print(f"error: budget exceeded: {e}", file=err)
        return 2
    except ValueError as e:
        print(f"error: {e}", file=err)
        return 1
    except RuntimeError as e:
        print(f"error: internal consistency failure: {e}", file=err)
        return 3
    return 0
