import hashlib
import json
import os
from pathlib import Path

import numpy as np
import pytest

from sppsim import cli, config
from sppsim.config import ConfigError
from sppsim.experiments import OUTPUT_DIR_ENV, run
from sppsim.fields import Grid, ScalarField2D, Unit
from sppsim.io import quantize, read_csv, read_pgm, write_csv, write_pgm, write_table_csv

GOLDEN = Path(__file__).parent / "golden" / "figures_seed0.sha256"


def digest_dir(d: Path) -> dict:
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(d.iterdir())}


class TestPgm:
    def test_uniform_half_is_32768(self, tmp_path):
        f = ScalarField2D(Grid.square(5, 1.0), np.full((5, 5), 0.5), Unit.INTENSITY)
        p = write_pgm(f, tmp_path / "u.pgm")
        assert np.all(read_pgm(p) == 32768)

    def test_minimal_file(self, tmp_path):
        f = ScalarField2D(Grid.square(1, 1.0), np.zeros((1, 1)), Unit.INTENSITY)
        data = write_pgm(f, tmp_path / "one.pgm").read_bytes()
        assert data == b"P5\n1 1\n65535\n\x00\x00"
        assert len(data) == 13 + 2

    def test_orientation_and_byte_order(self, tmp_path):
        g = Grid(2, 2, 1.0, 1.0)
        v = np.array([[0.0, 1.0], [0.25, 0.5]])  # [ix, iz]
        data = write_pgm(ScalarField2D(g, v, Unit.INTENSITY), tmp_path / "o.pgm").read_bytes()
        body = np.frombuffer(data[-8:], dtype=">u2").reshape(2, 2)
        # top row is the larger z
        assert body.tolist() == [[65535, 32768], [0, 16384]]

    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        for unit in (Unit.INTENSITY, Unit.THICKNESS):
            f = ScalarField2D(Grid(7, 4, 1.0, 2.0), rng.random((7, 4)), unit)
            assert np.array_equal(read_pgm(write_pgm(f, tmp_path / "r.pgm")), quantize(f))

    def test_stretch_for_other_units(self):
        f = ScalarField2D(Grid(3, 1, 1.0, 1.0), np.array([[2.0], [3.0], [4.0]]), Unit.THICKNESS)
        assert quantize(f).ravel().tolist() == [0, 32768, 65535]
        flat = ScalarField2D(Grid(2, 1, 1.0, 1.0), np.full((2, 1), 5.0), Unit.THICKNESS)
        assert quantize(flat).ravel().tolist() == [0, 0]

    def test_rejects_non_finite(self, tmp_path):
        f = ScalarField2D(Grid.square(2, 1.0), np.array([[0.0, np.nan], [0.0, 0.0]]), Unit.PHASE)
        with pytest.raises(ValueError):
            write_pgm(f, tmp_path / "bad.pgm")


class TestCsv:
    def test_two_by_two(self, tmp_path):
        f = ScalarField2D(Grid(2, 2, 1.0, 1.0), np.array([[1.0, 2.0], [3.0, 4.0]]), Unit.DIMENSIONLESS)
        lines = write_csv(f, tmp_path / "m.csv").read_text().splitlines()
        assert len(lines) == 3 and lines[0].startswith("#")
        assert lines[1:] == ["2.0,4.0", "1.0,3.0"]

    def test_round_trip_is_bit_exact(self, tmp_path):
        v = np.random.default_rng(9).normal(size=(6, 5)) * 1e-7
        v[0, 0] = 0.1 + 0.2
        f = ScalarField2D(Grid(6, 5, 3e-3, 2e-3), v, Unit.THICKNESS)
        back = read_csv(write_csv(f, tmp_path / "f.csv"))
        assert back.values.tobytes() == f.values.tobytes()
        assert back.grid == f.grid and back.unit == f.unit

    def test_100_square_shape(self, tmp_path):
        f = ScalarField2D(Grid.square(100, 16e-3), np.full((100, 100), 0.25), Unit.INTENSITY)
        lines = write_csv(f, tmp_path / "h.csv").read_text().splitlines()
        assert len(lines) == 101
        assert all(len(l.split(",")) == 100 for l in lines[1:])

    def test_table(self, tmp_path):
        p = write_table_csv(tmp_path / "t.csv", ["a", "b"], [[1, 2], [0.5, 1 / 3]])
        assert p.read_text().splitlines() == ["a,b", "1.0,0.5", f"2.0,{1/3!r}"]


def small_cfg(**kw):
    d = {"experiment": "interferogram", "grid_n": 64, "spps": [{"L": 2}],
         "detector": {"nu": 32, "nv": 32, "pixel_pitch": 0.5e-3}, "phi0": [0.0, 1.0]}
    d.update(kw)
    return d


class TestConfig:
    def test_every_problem_is_listed(self):
        with pytest.raises(ConfigError) as exc:
            config.from_dict({"experiment": "warp", "wavelength": -1, "grid_n": 0,
                              "formats": ["tiff"], "spps": [{"L": "x"}]})
        text = str(exc.value)
        for key in ("experiment", "wavelength", "grid_n", "formats", "spps[0]"):
            assert key in text
        assert len(exc.value.problems) >= 5

    def test_seed_required_for_noise(self):
        d = small_cfg(detector={"nu": 32, "nv": 32, "pixel_pitch": 0.5e-3, "noise_model": "poisson"})
        with pytest.raises(ConfigError, match="seed"):
            config.from_dict(d)
        assert config.from_dict(dict(d, seed=1)).seed == 1

    def test_round_trip(self):
        for name in config.PRESETS:
            cfg = config.preset(name)
            again = config.parse(cfg.to_json())
            assert again.to_dict() == cfg.to_dict()
            assert config.parse(again.to_json()).to_json() == again.to_json()

    def test_invalid_json(self):
        with pytest.raises(ConfigError):
            config.parse("{not json")

    def test_set_dotted(self):
        d = {}
        config.set_dotted(d, "detector.sigma_rel", 0.1)
        assert d == {"detector": {"sigma_rel": 0.1}}


class TestCli:
    def test_success_and_outputs(self, tmp_path, capsys):
        cfgp = tmp_path / "c.json"
        cfgp.write_text(json.dumps(small_cfg()))
        assert cli.main(["interferogram", "--config", str(cfgp), "--output-dir", str(tmp_path / "o")]) == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["conservation_max_error"] <= 1e-12
        assert (tmp_path / "o" / "interferogram_summary.json").exists()
        pgms = sorted((tmp_path / "o").glob("*.pgm"))
        assert len(pgms) == 2
        assert read_pgm(pgms[0]).shape == (32, 32)

    def test_validation_exit_code(self, tmp_path, capsys):
        rc = cli.main(["interferogram", "--output-dir", str(tmp_path), "--wavelength", "-1",
                       "--grid-n", "0"])
        err = capsys.readouterr().err
        assert rc == 2
        assert "wavelength" in err and "grid_n" in err

    def test_missing_seed_exit_code(self, tmp_path):
        rc = cli.main(["interferogram", "--output-dir", str(tmp_path), "--grid-n", "64",
                       "--set", 'detector={"nu":32,"nv":32,"pixel_pitch":0.0005,"noise_model":"gaussian"}'])
        assert rc == 2

    def test_io_exit_code(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        rc = cli.main(["interferogram", "--output-dir", str(blocker / "sub"), "--grid-n", "64",
                       "--set", 'detector={"nu":32,"nv":32,"pixel_pitch":0.0005}'])
        assert rc == 3

    def test_env_output_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "env"))
        assert cli.main(["deflection"]) == 0
        assert any((tmp_path / "env").iterdir())

    def test_overrides_and_dump(self, capsys):
        rc = cli.main(["interferogram", "--preset", "l-series", "--seed", "5", "--phi0", "0,1.5",
                       "--set", "detector.sigma_rel=0.1", "--dump-config"])
        assert rc == 0
        d = json.loads(capsys.readouterr().out)
        assert d["seed"] == 5 and d["phi0"] == [0.0, 1.5] and d["detector"]["sigma_rel"] == 0.1

    def test_preset_experiment_mismatch(self):
        assert cli.main(["borrmann", "--preset", "l-series", "--dump-config"]) == 2

    def test_presets_listing(self, capsys):
        assert cli.main(["presets"]) == 0
        assert "flag-rotation" in capsys.readouterr().out

    @pytest.mark.parametrize("name", ["plate-maps", "addition", "coherence", "borrmann", "oam-ring", "deflection"])
    def test_each_experiment_runs(self, name, tmp_path):
        cfg = config.preset(name)
        cfg.grid_n = min(cfg.grid_n, 200)
        cfg.radon = {}
        if "n_gamma" in cfg.crystal:
            cfg.crystal = dict(cfg.crystal, n_gamma=21)
        cfg.output_dir = str(tmp_path)
        res = run(cfg)
        assert res.files and all(Path(f).exists() for f in res.files)
        if "conservation_max_error" in res.summary:
            assert res.summary["conservation_max_error"] <= 1e-12


class TestDeterminism:
    def test_parallel_equals_serial(self, tmp_path):
        for jobs, sub in ((1, "a"), (3, "b")):
            cfg = config.preset("flag-rotation")
            cfg.seed, cfg.output_dir = 0, str(tmp_path / sub)
            run(cfg, jobs=jobs)
        assert digest_dir(tmp_path / "a") == digest_dir(tmp_path / "b")

    def test_golden_figures(self, tmp_path):
        assert cli.main(["figures", "--seed", "0", "--output-dir", str(tmp_path)]) == 0
        got = digest_dir(tmp_path)
        if os.environ.get("SPPSIM_UPDATE_GOLDEN"):
            GOLDEN.parent.mkdir(exist_ok=True)
            GOLDEN.write_text("".join(f"{h}  {n}\n" for n, h in got.items()))
        want = dict(line.split()[::-1] for line in GOLDEN.read_text().splitlines())
        assert got == want
