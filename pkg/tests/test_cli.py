"""CLI: word grammar, config parsing, task execution, fixtures, exit codes."""

import json
import shutil

import pytest

import graphprod.cli as cli
from graphprod.cli import (
    FIXTURE_NAMES,
    build_group,
    execute,
    fixture_report,
    format_expr,
    load_config,
    main,
    parse_config,
    parse_expr,
    parse_word,
    render_report,
    run_fixtures,
)
from graphprod.finitegroup import cyclic
from graphprod.presentation import (
    Letter,
    build_graph_product,
    commutator_shape,
    free_reduce,
    word_inverse,
)
from reference_values import (
    EDGELESS3_223_BASIS_ORDERED,
    EDGELESS3_MATRICES,
    EDGELESS3_TABLES,
    GL3_V,
    PATH4_MATRICES,
    PATH4_MATRIX_BY_GENERATOR,
    PATH4_TABLES,
)

GOLDEN_DIR = cli._GOLDEN_DIR


@pytest.fixture()
def pres3():
    return build_graph_product([cyclic(2)] * 3, [])


class TestWordGrammar:
    def test_plain_letters(self, pres3):
        w = parse_word("a b c", pres3)
        assert w == (Letter(1, 1, 1), Letter(2, 1, 1), Letter(3, 1, 1))

    def test_identity_word(self, pres3):
        assert parse_word("1", pres3) == ()
        assert parse_word("a 1 b", pres3) == (Letter(1, 1, 1), Letter(2, 1, 1))

    def test_exponents_expand(self, pres3):
        assert parse_word("(b a)^2", pres3) == parse_word("b a b a", pres3)
        assert parse_word("a^3", pres3) == (Letter(1, 1, 1),) * 3

    def test_negative_exponent_inverts(self, pres3):
        w = parse_word("a b", pres3)
        assert parse_word("(a b)^-1", pres3) == word_inverse(w)
        assert parse_word("b^-1", pres3) == (Letter(2, 1, -1),)

    def test_nested_groups(self, pres3):
        assert parse_word("((a b)^2 c)^-1", pres3) == word_inverse(
            parse_word("a b a b c", pres3)
        )

    def test_qualified_names(self):
        pres = build_graph_product([cyclic(3), cyclic(3)], [])
        w = parse_word("v1.g v2.g2", pres)
        assert w == (Letter(1, 1, 1), Letter(2, 2, 1))
        # the identity label qualifies to the empty word
        assert parse_word("v1.1", pres) == ()

    @pytest.mark.parametrize(
        "text",
        ["q", "a )", "( a", "^2", "a ^", "a $ b", "v9.g1"],
    )
    def test_rejections(self, pres3, text):
        with pytest.raises(ValueError):
            parse_word(text, pres3)

    def test_expr_round_trip(self):
        e = parse_expr("x3 x5 x4^-1 x2^-1")
        assert e == ((3, 1), (5, 1), (4, -1), (2, -1))
        assert format_expr(e) == "x3 x5 x4^-1 x2^-1"
        assert format_expr(parse_expr("1")) == "1"
        assert parse_expr("(x1 x2)^-1") == ((2, -1), (1, -1))


class TestBuildGroup:
    @pytest.mark.parametrize(
        "spec,order",
        [
            ({"type": "cyclic", "order": 5}, 5),
            ({"type": "symmetric", "degree": 4}, 24),
            ({"type": "abelian", "factors": [2, 6]}, 12),
            (
                {
                    "type": "permutation",
                    "degree": 3,
                    "generators": [[2, 3, 1]],
                },
                3,
            ),
            (
                {
                    "type": "table",
                    "elements": ["e", "g"],
                    "table": [[0, 1], [1, 0]],
                },
                2,
            ),
        ],
    )
    def test_known_types(self, spec, order):
        assert build_group(spec).order == order

    def test_unknown_type(self):
        with pytest.raises(ValueError, match="unknown group type"):
            build_group({"type": "sporadic"})


def minimal_config(**overrides):
    data = {
        "groups": [{"type": "cyclic", "order": 2}] * 3,
        "complex": {"vertices": 3, "facets": []},
        "tasks": ["rank"],
    }
    data.update(overrides)
    return data


class TestParseConfig:
    def test_accepts_minimal(self):
        config = parse_config(minimal_config())
        assert config.complex.n == 3
        assert config.tasks == ("rank",)
        assert config.options["coset_bound"] == 20000

    def test_vertex_count_mismatch(self):
        with pytest.raises(ValueError, match="does not match"):
            parse_config(minimal_config(complex={"vertices": 2, "facets": []}))

    def test_unknown_task(self):
        with pytest.raises(ValueError, match="unknown tasks"):
            parse_config(minimal_config(tasks=["rank", "draw"]))

    def test_unknown_option(self):
        with pytest.raises(ValueError, match="unknown options"):
            parse_config(minimal_config(options={"speed": 11}))

    def test_unknown_key(self):
        with pytest.raises(ValueError, match="unknown config keys"):
            parse_config(minimal_config(extra=1))

    def test_unsupported_convention(self):
        with pytest.raises(ValueError, match="convention"):
            parse_config(
                minimal_config(options={"matrix_convention": "columns-are-images"})
            )

    def test_basis_must_be_words(self):
        with pytest.raises(ValueError, match="list of words"):
            parse_config(minimal_config(basis=[3]))

    def test_empty_tasks_rejected(self):
        with pytest.raises(ValueError, match="tasks"):
            parse_config(minimal_config(tasks=[]))


class TestExecute:
    def test_ex41_report_matches_references(self):
        config = load_config(GOLDEN_DIR / "ex4.1.config.json")
        report = execute(config)
        results = report["results"]
        assert results["rank"]["methods"] == {
            "euler": "5",
            "tietze": "5",
            "closed_form": "5",
            "recursion": "5",
        }
        assert results["aut"]["tables"] == EDGELESS3_TABLES
        assert results["matrices"]["by_generator"] == {
            k: v for k, v in EDGELESS3_MATRICES.items()
        }
        assert results["matrices"]["classification"] == "SL"
        assert results["verify"]["faithful"] is True
        assert results["verify"]["image_order"] == "8"
        assert results["homology-check"]["all_traces_match"] is True
        assert results["h1-check"]["image_trivial"] is True
        assert results["h1-check"]["surjective"] is False

    def test_ex42_report_matches_references(self):
        config = load_config(GOLDEN_DIR / "ex4.2.config.json")
        report = execute(config)
        results = report["results"]
        assert results["aut"]["tables"] == PATH4_TABLES
        expected = {
            gen: PATH4_MATRICES[key]
            for gen, key in PATH4_MATRIX_BY_GENERATOR.items()
        }
        assert results["matrices"]["by_generator"] == expected
        assert results["verify"]["image_order"] == "16"

    def test_ex33_basis_words_in_documented_order(self):
        config = load_config(GOLDEN_DIR / "ex3.3.config.json")
        report = execute(config)
        words = report["results"]["basis"]["words"]
        pres = build_graph_product(config.groups, [])
        shapes = [
            commutator_shape(free_reduce(parse_word(w, pres)), 3) for w in words
        ]
        assert shapes == EDGELESS3_223_BASIS_ORDERED
        assert report["results"]["rank"]["value"] == "9"

    def test_ex35_rank(self):
        config = load_config(GOLDEN_DIR / "ex3.5.config.json")
        report = execute(config)
        assert report["results"]["rank"]["value"] == "22"
        assert report["results"]["basis"]["rank"] == "22"

    def test_report_words_reparse(self):
        config = load_config(GOLDEN_DIR / "ex3.3.config.json")
        report = execute(config)
        pres = build_graph_product(config.groups, [])
        for text in report["results"]["basis"]["words"]:
            assert parse_word(text, pres)

    def test_echoed_config_round_trips(self):
        config = load_config(GOLDEN_DIR / "ex4.1.config.json")
        report = execute(config)
        again = parse_config(report["config"])
        assert again.echo == config.echo

    def test_deterministic_bytes(self):
        config = load_config(GOLDEN_DIR / "ex4.1.config.json")
        first = render_report(execute(config))
        second = render_report(execute(load_config(GOLDEN_DIR / "ex4.1.config.json")))
        assert first == second

    def test_user_basis_rejected_with_diagnostic(self):
        data = minimal_config(
            basis=["(b a)^4", "(c a)^2", "(c b)^2", "a c b c b a", "b c a c b a"],
            tasks=["basis"],
        )
        with pytest.raises(ValueError, match="user basis rejected"):
            execute(parse_config(data))

    def test_basis_parse_checked_even_without_kernel_tasks(self):
        data = {
            "groups": [{"type": "symmetric", "degree": 3}],
            "complex": {"vertices": 1, "facets": []},
            "basis": ["nosuchgen"],
            "tasks": ["ct-report"],
        }
        with pytest.raises(ValueError, match="unknown generator"):
            execute(parse_config(data))

    def test_ct_report_values(self):
        config = load_config(GOLDEN_DIR / "ct-sym3.config.json")
        report = execute(config)
        section = report["results"]["ct-report"]["v1"]
        assert section["covering_number"] == "4"
        assert section["commuting_space_rank"] == "8"
        assert section["cover_kernel_rank"] == "29"
        assert section["rank_gap"] == "21"
        assert section["common_subgroup_rank"] == "85"
        assert section["solvability"]["solvable"] is True


class TestFixtures:
    def test_all_pass_against_goldens(self):
        reports = run_fixtures()
        assert [r["name"] for r in reports] == list(FIXTURE_NAMES)

    def test_filter_selects_substring(self):
        assert [r["name"] for r in run_fixtures("ct-")] == [
            "ct-sym3",
            "ct-c7c3",
            "ct-alt5",
        ]

    def test_filter_without_match_is_empty(self):
        assert run_fixtures("nosuchfixture") == []

    def test_ex43_orders(self):
        report = fixture_report("ex4.3")
        section = report["results"]["matrix-orders"]
        assert section["group_order"] == "48"
        assert section["twisted_product_order"] == "6"
        assert section["twisted_product"] == GL3_V

    def test_golden_mismatch_raises(self, tmp_path, monkeypatch):
        for path in GOLDEN_DIR.iterdir():
            if path.name != ".gitkeep":
                shutil.copy(path, tmp_path / path.name)
        stale = tmp_path / "ex3.3.golden.json"
        stale.write_text(stale.read_text().replace('"9"', '"8"'))
        monkeypatch.setattr(cli, "_GOLDEN_DIR", tmp_path)
        with pytest.raises(RuntimeError, match="diverges"):
            run_fixtures("ex3.3")


class TestMain:
    def test_run_writes_report_and_summary(self, tmp_path, capsys):
        code = main(["run", str(GOLDEN_DIR / "ex4.1.config.json")])
        captured = capsys.readouterr()
        assert code == 0
        report = json.loads(captured.out)
        assert report["results"]["verify"]["faithful"] is True
        assert "rank: 5" in captured.err
        assert "verify: faithful, image order 8" in captured.err

    def test_out_flag_redirects(self, tmp_path, capsys):
        target = tmp_path / "report.json"
        code = main(
            ["run", str(GOLDEN_DIR / "ex3.3.config.json"), "--out", str(target)]
        )
        captured = capsys.readouterr()
        assert code == 0
        assert captured.out == ""
        assert json.loads(target.read_text())["results"]["rank"]["value"] == "9"

    def test_chordless_cycle_exits_1(self, tmp_path, capsys):
        config = tmp_path / "cycle.json"
        config.write_text(
            json.dumps(
                {
                    "groups": [{"type": "cyclic", "order": 2}] * 4,
                    "complex": {
                        "vertices": 4,
                        "facets": [[1, 2], [2, 3], [3, 4], [1, 4]],
                    },
                    "tasks": ["rank"],
                }
            )
        )
        code = main(["run", str(config)])
        captured = capsys.readouterr()
        assert code == 1
        assert "kernel not free: chordless cycle (1, 2, 3, 4)" in captured.err
        assert captured.out == ""

    def test_budget_flag_exits_2(self, capsys):
        code = main(
            ["run", str(GOLDEN_DIR / "ex4.2.config.json"), "--budget", "3"]
        )
        captured = capsys.readouterr()
        assert code == 2
        assert "budget exceeded" in captured.err

    def test_bad_json_exits_1_with_position(self, tmp_path, capsys):
        config = tmp_path / "bad.json"
        config.write_text('{"groups": [,]}')
        code = main(["run", str(config)])
        captured = capsys.readouterr()
        assert code == 1
        assert "line 1 column 13" in captured.err

    def test_missing_file_exits_1(self, tmp_path, capsys):
        code = main(["run", str(tmp_path / "absent.json")])
        assert code == 1

    def test_fixture_mismatch_exits_3(self, tmp_path, monkeypatch, capsys):
        for path in GOLDEN_DIR.iterdir():
            if path.name != ".gitkeep":
                shutil.copy(path, tmp_path / path.name)
        stale = tmp_path / "ex3.3.golden.json"
        stale.write_text(stale.read_text().replace('"9"', '"8"'))
        monkeypatch.setattr(cli, "_GOLDEN_DIR", tmp_path)
        code = main(["fixtures", "--filter", "ex3.3"])
        captured = capsys.readouterr()
        assert code == 3
        assert "internal consistency failure" in captured.err

    def test_fixtures_filter_lists_names(self, capsys):
        code = main(["fixtures", "--filter", "ex4.3"])
        captured = capsys.readouterr()
        assert code == 0
        assert "fixture ex4.3: ok" in captured.err
        assert [r["name"] for r in json.loads(captured.out)] == ["ex4.3"]
