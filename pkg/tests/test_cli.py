import json
import shutil

import pytest

from foon import __version__
from foon.cli import load_graph, main
from foon.model import Level
from foon.parser import (
    parse_category_index,
    parse_similarity_matrix,
    parse_subgraph,
    parse_taxonomy,
    serialize_similarity_matrix,
    serialize_units,
)
from foon.similarity import SimilarityIndex, build_similarity_index
from foon.transform import ExpansionConfig, expand, generalize
from conftest import DATA

SALAD = str(DATA / "salad.foon")
KITCHEN = str(DATA / "salad_kitchen.txt")
GOAL = "bowl:contains:I=tomato,lettuce"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_stats(capsys):
    assert run(capsys, "stats", "--graph", SALAD) == (0, "objects=5 motions=2 units=2\n", "")
    assert run(capsys, "stats", "--graph", SALAD, "--level", "2")[1] == "objects=4 motions=2 units=2\n"
    assert run(capsys, "stats", "--graph", SALAD, "--graph", SALAD)[1] == "objects=5 motions=2 units=2\n"


def test_validate(capsys, tmp_path):
    assert run(capsys, "validate", SALAD)[:2] == (0, f"{SALAD}: ok units=2\n")
    code, _, err = run(capsys, "validate", str(DATA / "errors" / "state_before_object.foon"))
    assert code == 65
    record = json.loads(err)
    assert record["line"] == 1
    assert "state before object, line 1" in record["message"]


def test_validate_motion_index(capsys, tmp_path):
    motions = tmp_path / "motions.txt"
    motions.write_text("cut\n")
    assert run(capsys, "validate", SALAD, "--motions", str(motions))[0] == 65
    motions.write_text("cut\npour\n")
    assert run(capsys, "validate", SALAD, "--motions", str(motions))[0] == 0


def test_merge_idempotent(capsys):
    once = run(capsys, "merge", SALAD)
    twice = run(capsys, "merge", SALAD, SALAD)
    assert once == twice
    assert once[1] == (DATA / "salad.foon").read_text()


def test_merge_writes_file(capsys, tmp_path):
    out = tmp_path / "m.foon"
    assert run(capsys, "merge", SALAD, "--out", str(out)) == (0, "", "")
    assert len(parse_subgraph(out.read_text())) == 2


def test_abstract_matches_library(capsys):
    code, out, _ = run(capsys, "abstract", SALAD, "--level", "1")
    assert code == 0
    assert out == serialize_units(load_graph([SALAD], Level.L1).units)
    assert "\nS\t" not in out and "\nI\t" not in out


def test_expand_matches_library(capsys, tmp_path):
    index = tmp_path / "sim.tsv"
    index.write_text("lettuce\tspinach\t0.95\nknife\tcleaver\t0.5\n")
    code, out, _ = run(capsys, "expand", SALAD, "--index", str(index))
    idx = SimilarityIndex.from_matrix(parse_similarity_matrix(index.read_text()), 0.89)
    assert code == 0
    assert out == serialize_units(expand(load_graph([SALAD], Level.L3), idx, ExpansionConfig()).units)
    assert "cleaver" not in out
    assert "cleaver" in run(capsys, "expand", SALAD, "--index", str(index), "--threshold", "0.4")[1]


def test_expand_cap_is_data_error(capsys, tmp_path):
    index = tmp_path / "sim.tsv"
    index.write_text("lettuce\tspinach\t0.95\n")
    code, _, err = run(capsys, "expand", SALAD, "--index", str(index), "--max-units", "3")
    assert code == 65
    assert "limit 3" in json.loads(err)["message"]


def test_generalize_matches_library(capsys, tmp_path):
    cats = tmp_path / "cats.txt"
    cats.write_text("CATEGORIES\tgreens\nlettuce\tgreens\n")
    code, out, _ = run(capsys, "generalize", SALAD, "--categories", str(cats))
    assert code == 0
    expected = generalize(load_graph([SALAD], Level.L3), parse_category_index(cats.read_text()))
    assert out == serialize_units(expected.units)
    assert "greens" in out and "lettuce" not in out


def test_similarity_matches_library(capsys, tmp_path):
    tax = tmp_path / "tax.tsv"
    tax.write_text("food\troot\nvegetable\tfood\nkale\tvegetable\nlettuce\tvegetable\n")
    objects = tmp_path / "objects.txt"
    objects.write_text("kale\nlettuce\nfood\ngranite\n")
    code, out, err = run(capsys, "similarity", "--taxonomy", str(tax), "--objects", str(objects),
                         "--threshold", "0.7")
    assert code == 0
    idx = build_similarity_index(parse_taxonomy(tax.read_text()), ["kale", "lettuce", "food", "granite"], 0.7)
    assert out == serialize_similarity_matrix(idx.to_matrix()) == "kale\tlettuce\t0.75\n"
    assert err == "unresolved\tgranite\n"


def test_retrieve_exit_codes(capsys, tmp_path):
    code, out, err = run(capsys, "retrieve", "--graph", SALAD, "--goal", GOAL, "--kitchen", KITCHEN)
    assert code == 0
    assert [u.motion.label for u in parse_subgraph(out).units] == ["cut", "pour"]
    assert err.startswith("solved steps=2")

    no_knife = tmp_path / "k.txt"
    no_knife.write_text("lettuce\twhole\nbowl\tcontains\tI=tomato\n")
    assert run(capsys, "retrieve", "--graph", SALAD, "--goal", GOAL, "--kitchen", str(no_knife))[0] == 1
    code, _, err = run(capsys, "retrieve", "--graph", SALAD, "--goal", GOAL, "--kitchen", KITCHEN, "--budget", "1")
    assert (code, err) == (2, "timeout expansions=1\n")


def test_bench(capsys, tmp_path):
    shutil.copy(SALAD, tmp_path / "reg.foon")
    (tmp_path / "cats.txt").write_text("CATEGORIES\tgreens\nlettuce\tgreens\n")
    (tmp_path / "exp.toml").write_text(
        'reg = "reg.foon"\ncategories = "cats.txt"\ntrials = 2\ngoals_per_trial = 2\nkitchen_size = 1.0\n'
    )
    args = ("bench", "--config", str(tmp_path / "exp.toml"), "--zero-timing", "--level", "3")
    code, out, _ = run(capsys, *args)
    assert code == 0
    assert out == run(capsys, *args)[1]
    aggregate = [json.loads(line) for line in out.splitlines()][-2:]
    assert [(r["graph"], r["successes"]) for r in aggregate] == [("REG", [2, 2]), ("GEN", [2, 2])]
    assert run(capsys, *args, "--csv")[1].startswith("graph,mean_retrieval_ms\nREG,0.0\nGEN,0.0\n")


def test_usage_errors(capsys):
    assert run(capsys, "frobnicate")[0] == 64
    assert run(capsys, "stats")[0] == 64
    assert run(capsys, "stats", "--graph", SALAD, "--level", "4")[0] == 64
    code, _, err = run(capsys, "stats", "--graph", "/nonexistent.foon")
    assert code == 64
    assert json.loads(err)["error"] == "usage"
    assert run(capsys, "retrieve", "--graph", SALAD, "--goal", "", "--kitchen", KITCHEN)[0] == 64


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert capsys.readouterr().out == f"foon {__version__}\n"
