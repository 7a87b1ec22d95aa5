import pytest

from auxcell.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, main
from auxcell.genome import ARCH0, ARCH1
from auxcell.search import SearchLog

from .helpers import tiny_settings


class TestUsage:
    def test_missing_command(self, capsys):
        assert main([]) == EXIT_USAGE
        assert "usage: auxcell" in capsys.readouterr().err

    def test_bad_choice(self):
        assert main(["search", "--mode", "evolution"]) == EXIT_USAGE

    def test_train_without_genome(self, tmp_path):
        config = tmp_path / "ac.json"
        config.write_text(tiny_settings().model_dump_json())
        assert main(["train", "--config", str(config), "--workdir", str(tmp_path / "work")]) == EXIT_USAGE


class TestConfigErrors:
    def test_missing_file(self, tmp_path):
        assert main(["decode", ARCH0, "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG

    def test_malformed_file(self, tmp_path):
        config = tmp_path / "broken.json"
        config.write_text('{"search": ')
        assert main(["decode", ARCH0, "--config", str(config)]) == EXIT_CONFIG

    def test_unknown_key(self, tmp_path, capsys):
        config = tmp_path / "unknown.json"
        config.write_text('{"search": {"architectures": 10}}')
        assert main(["decode", ARCH0, "--config", str(config)]) == EXIT_CONFIG
        assert "configuration error" in capsys.readouterr().err


class TestGenomeCommands:
    def test_decode(self, capsys):
        assert main(["decode", ARCH0]) == EXIT_OK
        out = capsys.readouterr().out
        assert "sep5x5 rate 6" in out
        assert "params=" in out and "madds=" in out

    def test_decode_file(self, tmp_path, capsys):
        path = tmp_path / "genomes.txt"
        path.write_text(f"{ARCH0}\n\n{ARCH1}\n")
        assert main(["decode", str(path)]) == EXIT_OK
        assert capsys.readouterr().out.count("Canonical:") == 2

    def test_invalid_genome(self, capsys):
        assert main(["decode", "[[[0,9],[0,0],[0,0]],[0,[0,0,0,0],[0,0,0,0],[0,0,0,0]]]"]) == EXIT_RUNTIME
        assert "GenomeRangeError" in capsys.readouterr().err
        assert main(["decode", "[[[0,0]"]) == EXIT_RUNTIME

    def test_export_dot(self, tmp_path):
        out = tmp_path / "arch0.dot"
        assert main(["export-dot", ARCH0, "--out", str(out)]) == EXIT_OK
        assert out.read_text().startswith("digraph decoder")

        dump = tmp_path / "arch0.txt"
        assert main(["export-dot", ARCH0, "--aux-mode", "none", "--dump", "--out", str(dump)]) == EXIT_OK
        assert "\t" in dump.read_text()

    def test_enumerate(self, tmp_path, capsys):
        out = tmp_path / "connectivities.txt"
        assert main(["enumerate", "--out", str(out)]) == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[-1] == "count=3150"
        assert len(lines) == 3151
        assert lines[0] == "[[0,0],[0,0],[0,0]]"
        assert "connectivity_canonical=3150" in capsys.readouterr().out

    def test_enumerate_to_stdout(self, capsys):
        assert main(["enumerate"]) == EXIT_OK
        out = capsys.readouterr().out.splitlines()
        assert "count=3150" in out
        assert "connectivity_ordered=14400" in out
        assert "cell_upper_bound=124717894400 (before symmetry reduction)" in out


class TestPipeline:
    """Search, full training and evaluation through the command line on the tiny task."""

    @pytest.fixture(scope="class")
    def workspace(self, tmp_path_factory):
        root = tmp_path_factory.mktemp("cli")
        config = root / "ac.json"
        config.write_text(tiny_settings().model_dump_json())
        common = ["--config", str(config), "--workdir", str(root / "work")]
        assert main(["search", *common, "--mode", "random", "--archs", "3"]) == EXIT_OK
        return root, common

    def test_search_log(self, workspace):
        root, _ = workspace
        header, records = SearchLog(root / "work" / "search-random-s0.jsonl").read(complete=True)
        assert header.mode == "random"
        assert len(records) == 3

    def test_resume_complete_log(self, workspace, capsys):
        root, common = workspace
        log = root / "work" / "search-random-s0.jsonl"
        assert main(["search", *common, "--resume", str(log)]) == EXIT_OK
        assert "Top" in capsys.readouterr().out

    def test_train_and_eval(self, workspace, capsys):
        root, common = workspace
        checkpoint = root / "arch1"
        assert main(["train", ARCH1, *common, "--aux-mode", "cell", "--out", str(checkpoint)]) == EXIT_OK
        assert f"checkpoint={checkpoint}" in capsys.readouterr().out

        assert main(["eval", str(checkpoint), *common, "--strip"]) == EXIT_OK
        assert "Reward" in capsys.readouterr().out

    def test_train_top_k(self, workspace):
        root, common = workspace
        log = root / "work" / "search-random-s0.jsonl"
        out = root / "top.csv"
        assert main(["train", *common, "--log", str(log), "--top-k", "1", "--aux-mode", "none", "--csv", str(out)]) == EXIT_OK
        assert len(out.read_text().splitlines()) == 2

    def test_report(self, workspace):
        root, common = workspace
        log = root / "work" / "search-random-s0.jsonl"
        out = root / "report"
        assert main(["report", str(log), "--out", str(out), "--no-plots"]) == EXIT_OK
        assert (out / "summary.csv").exists()

    def test_missing_checkpoint(self, workspace):
        root, common = workspace
        assert main(["eval", str(root / "nothing"), *common]) == EXIT_RUNTIME
