import numpy as np
import pytest

from shelldec.cli import main
from shelldec.fileio import (
    read_coefficient_file,
    read_curve_file,
    write_coefficient_file,
    write_curve_file,
)
from shelldec.shells import make_grid
from tests.conftest import interference_values


@pytest.fixture
def interference_file(tmp_path):
    r = make_grid(8.0, 0.01)
    path = tmp_path / "curves.dat"
    write_curve_file(path, r, [("G", interference_values(r))])
    return path


def run(*argv) -> int:
    return main([str(a) for a in argv])


class TestDecomposeCommand:
    def test_converges_on_interference_curve(self, tmp_path, interference_file, capsys):
        code = run(
            "decompose", "--input", interference_file,
            "--coefficients-output", tmp_path / "g.coef",
            "--curves-output", tmp_path / "g.fit",
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "converged=True" in out and "G:" in out
        blocks = read_coefficient_file(tmp_path / "g.coef")
        assert {b.stage for b in blocks} == {"initial", "refined"}
        fit = read_curve_file(tmp_path / "g.fit")
        assert fit.labels() == ["G", "G_model", "G_diff"]
        assert np.max(np.abs(fit.columns[2][1])) <= 1e-3

    def test_param_file_driven(self, tmp_path, interference_file):
        par = tmp_path / "run.par"
        par.write_text(
            f"input = {interference_file}\n"
            f"coefficients_output = {tmp_path / 'p.coef'}\n"
            f"curves_output = {tmp_path / 'p.fit'}\n"
            "eps_dec = 1e-3\n"
        )
        assert run("decompose", "--params", par) == 0
        assert (tmp_path / "p.coef").exists() and (tmp_path / "p.fit").exists()

    def test_budget_exhaustion_flags_nonconvergence(self, tmp_path, interference_file):
        code = run(
            "decompose", "--input", interference_file, "--max-peaks", "1",
            "--coefficients-output", tmp_path / "b.coef",
            "--curves-output", tmp_path / "b.fit",
        )
        assert code == 1
        assert (tmp_path / "b.coef").exists() and (tmp_path / "b.fit").exists()

    def test_empty_column_selection_is_usage_error(self, interference_file):
        assert run("decompose", "--input", interference_file, "--columns", ",") == 2

    def test_unknown_column_is_usage_error(self, interference_file):
        assert run("decompose", "--input", interference_file, "--columns", "nope") == 2

    def test_missing_input_file_is_io_error(self, tmp_path):
        assert run("decompose", "--input", tmp_path / "absent.dat") == 3

    def test_malformed_param_file_is_io_error(self, tmp_path):
        par = tmp_path / "run.par"
        par.write_text("nonsense = 1\n")
        assert run("decompose", "--params", par) == 3


class TestSumCommand:
    def test_difference_matches_decompose_residual_byte_for_byte(
        self, tmp_path, interference_file
    ):
        coef, fit = tmp_path / "g.coef", tmp_path / "g.fit"
        run(
            "decompose", "--input", interference_file,
            "--coefficients-output", coef, "--curves-output", fit,
        )
        out = tmp_path / "resum.fit"
        assert run(
            "sum", "--coefficients", coef, "--output", out,
            "--reference", interference_file,
        ) == 0
        assert out.read_bytes() == fit.read_bytes()

    def test_model_only_without_reference(self, tmp_path):
        coef = tmp_path / "one.coef"
        coef.write_text("block G refined 1\n0.0 20.0 3.0\n")
        out = tmp_path / "m.fit"
        assert run("sum", "--coefficients", coef, "--output", out,
                   "--r-max", "4", "--step", "0.01", "--eps-term", "0") == 0
        table = read_curve_file(out)
        assert table.labels() == ["G_model"]
        from shelldec.shells import gaussian_radial

        np.testing.assert_allclose(
            table.columns[0][1], 3.0 * gaussian_radial(table.r, 20.0), rtol=1e-12
        )

    def test_empty_block_gives_zero_curve(self, tmp_path):
        coef = tmp_path / "empty.coef"
        coef.write_text("block G refined 0\n")
        out = tmp_path / "z.fit"
        assert run("sum", "--coefficients", coef, "--output", out,
                   "--r-max", "1", "--step", "0.1") == 0
        assert np.all(read_curve_file(out).columns[0][1] == 0.0)

    def test_grid_spec_required_without_reference(self, tmp_path):
        coef = tmp_path / "one.coef"
        coef.write_text("block G refined 1\n0.0 20.0 3.0\n")
        assert run("sum", "--coefficients", coef, "--output", tmp_path / "x.fit") == 2

    def test_invalid_blur_in_coefficients_is_io_error(self, tmp_path):
        coef = tmp_path / "bad.coef"
        coef.write_text("block G refined 1\n0.0 -1.0 3.0\n")
        assert run("sum", "--coefficients", coef, "--output", tmp_path / "x.fit",
                   "--r-max", "1", "--step", "0.1") == 3

    def test_deleted_term_grows_deviation(self, tmp_path, interference_file, capsys):
        coef, fit = tmp_path / "g.coef", tmp_path / "g.fit"
        run(
            "decompose", "--input", interference_file,
            "--coefficients-output", coef, "--curves-output", fit,
        )
        blocks = [b for b in read_coefficient_file(coef) if b.stage == "refined"]
        full_dev = np.max(np.abs(read_curve_file(fit).columns[2][1]))
        blocks[0].terms.pop(1)
        trimmed = tmp_path / "trimmed.coef"
        write_coefficient_file(trimmed, blocks)
        out = tmp_path / "trimmed.fit"
        run("sum", "--coefficients", trimmed, "--output", out,
            "--reference", interference_file)
        dev = np.max(np.abs(read_curve_file(out).columns[2][1]))
        assert dev > 10.0 * full_dev


class TestResumCommand:
    def test_without_refine_matches_sum(self, tmp_path, interference_file):
        coef = tmp_path / "g.coef"
        run(
            "decompose", "--input", interference_file,
            "--coefficients-output", coef, "--curves-output", tmp_path / "g.fit",
        )
        a, b = tmp_path / "a.fit", tmp_path / "b.fit"
        run("sum", "--coefficients", coef, "--output", a,
            "--reference", interference_file)
        run("resum", "--coefficients", coef, "--reference", interference_file,
            "--output", b)
        assert a.read_bytes() == b.read_bytes()

    def test_perturbed_coefficients_recover_after_refinement(
        self, tmp_path, interference_file, capsys
    ):
        coef = tmp_path / "g.coef"
        run(
            "decompose", "--input", interference_file,
            "--coefficients-output", coef, "--curves-output", tmp_path / "g.fit",
        )
        original_dev = np.max(np.abs(read_curve_file(tmp_path / "g.fit").columns[2][1]))
        blocks = [b for b in read_coefficient_file(coef) if b.stage == "refined"]
        rng = np.random.default_rng(5)
        from shelldec.shells import ShellTerm

        blocks[0].terms = [
            ShellTerm(
                t.R * (1 + rng.uniform(-0.05, 0.05)),
                t.B * (1 + rng.uniform(-0.05, 0.05)),
                t.C * (1 + rng.uniform(-0.05, 0.05)),
            )
            for t in blocks[0].terms
        ]
        pert = tmp_path / "pert.coef"
        write_coefficient_file(pert, blocks)
        out = tmp_path / "ref.fit"
        assert run(
            "resum", "--coefficients", pert, "--reference", interference_file,
            "--output", out, "--refine",
            "--coefficients-output", tmp_path / "pert.refined.coef",
        ) == 0
        dev = np.max(np.abs(read_curve_file(out).columns[2][1]))
        assert dev <= 2.0 * original_dev
        refined_blocks = read_coefficient_file(tmp_path / "pert.refined.coef")
        assert {b.stage for b in refined_blocks} == {"initial", "refined"}


class TestAtomCommand:
    def test_two_column_image_file(self, tmp_path, capsys):
        out = tmp_path / "cs.dat"
        assert run("atom", "--labels", "C,S", "--resolution", "3", "--output", out) == 0
        table = read_curve_file(out)
        assert table.labels() == ["C", "S"]
        assert table.columns[1][1][0] > table.columns[0][1][0]  # S denser than C

    def test_large_blur_gives_near_gaussian_column(self, tmp_path):
        out = tmp_path / "c.dat"
        b0 = 10.0 * (2.0 * np.pi * 3.0) ** 2
        assert run("atom", "--labels", "C", "--resolution", "3", "--b0", str(b0),
                   "--output", out) == 0
        col = read_curve_file(out).columns[0][1]
        assert np.all(np.diff(col) < 0)  # ripples suppressed: monotone decay

    def test_unknown_label_lists_available(self, tmp_path, capsys):
        assert run("atom", "--labels", "Xx", "--resolution", "3",
                   "--output", tmp_path / "x.dat") == 2
        assert "available" in capsys.readouterr().err

    def test_nonpositive_resolution_is_usage_error(self, tmp_path):
        assert run("atom", "--labels", "C", "--resolution", "0",
                   "--output", tmp_path / "x.dat") == 2

    def test_custom_table(self, tmp_path):
        table = tmp_path / "t.tbl"
        table.write_text("dummy 1 1.0 20.0 0.0 stol\n")
        out = tmp_path / "d.dat"
        assert run("atom", "--labels", "dummy", "--resolution", "2.5",
                   "--table", table, "--output", out) == 0
        assert read_curve_file(out).labels() == ["dummy"]


class TestDeterminism:
    def test_repeated_runs_are_byte_identical(self, tmp_path, interference_file):
        outs = []
        for tag in ("one", "two"):
            coef = tmp_path / f"{tag}.coef"
            fit = tmp_path / f"{tag}.fit"
            run(
                "decompose", "--input", interference_file,
                "--coefficients-output", coef, "--curves-output", fit,
            )
            outs.append((coef.read_bytes(), fit.read_bytes()))
        assert outs[0] == outs[1]
