"""Configuration schema and command-line driver tests.

Schema errors are [TRIVIAL] contract checks; the determinism and
sweep-equals-solve checks are [DERIVED] consistency oracles.
"""

import copy
import json

import numpy as np
import pytest

from qpscat.cli import (
    EXIT_CONFIG,
    EXIT_NUMERICAL,
    EXIT_OK,
    main,
    run_selftest,
    run_solve,
    run_sweep,
    run_table,
    table_config,
)
from qpscat.config import ConfigError, config_from_dict, load_config

D = 2.0 * np.pi

BASE = {
    "version": 1,
    "dimension": 2,
    "d": D,
    "incidence": {"alpha": 0.0},
    "layers": [{"k": 1.5}, {"k": 2.5}],
    "interfaces": [{"type": "cosine", "height": 0.6}],
    "M": 32,
    "window": {"A": 20},
}


def variant(**overrides):
    data = copy.deepcopy(BASE)
    data.update(overrides)
    return data


class TestConfigSchema:
    def test_base_parses(self):
        cfg = config_from_dict(BASE)
        assert cfg.M == 32
        assert cfg.window_a == 20
        assert cfg.radius == pytest.approx(20 * D)
        assert len(cfg.layers) == 2

    def test_unsupported_version(self):
        with pytest.raises(ConfigError, match="version"):
            config_from_dict(variant(version=2))

    def test_dimension_three_rejected(self):
        with pytest.raises(ConfigError, match="dimension"):
            config_from_dict(variant(dimension=3))

    def test_missing_layers(self):
        data = variant()
        del data["layers"]
        with pytest.raises(ConfigError, match="layers"):
            config_from_dict(data)

    def test_layer_interface_count_mismatch_names_both_counts(self):
        data = variant(layers=[{"k": 1.5}, {"k": 2.5}, {"k": 3.5}])
        with pytest.raises(ConfigError, match="3 layers need 2 interfaces, got 1"):
            config_from_dict(data)

    def test_negative_wavenumber_field_path(self):
        data = variant(layers=[{"k": -1.0}, {"k": 2.5}])
        with pytest.raises(ConfigError, match=r"layers\[0\].k"):
            config_from_dict(data)

    def test_odd_m_rejected(self):
        with pytest.raises(ConfigError, match="M"):
            config_from_dict(variant(M=33))

    def test_alpha_and_angle_both_given(self):
        data = variant(incidence={"alpha": 0.1, "angle": 0.2})
        with pytest.raises(ConfigError, match="incidence"):
            config_from_dict(data)

    def test_angle_converts_to_alpha(self):
        cfg = config_from_dict(variant(incidence={"angle": np.pi / 6}))
        assert cfg.alpha == pytest.approx(1.5 * 0.5)

    def test_supersonic_alpha_rejected(self):
        with pytest.raises(ConfigError, match="incidence"):
            config_from_dict(variant(incidence={"alpha": 2.0}))

    def test_unknown_profile_type(self):
        data = variant(interfaces=[{"type": "spline"}])
        with pytest.raises(ConfigError, match=r"interfaces\[0\].type"):
            config_from_dict(data)

    def test_bad_window_c1(self):
        data = variant(window={"A": 20, "c1": 1.5})
        with pytest.raises(ConfigError, match="window.c1"):
            config_from_dict(data)

    def test_shift_count_mismatch(self):
        data = variant(wood={"shifts": [1.0]})
        with pytest.raises(ConfigError, match="wood.shifts"):
            config_from_dict(data)

    def test_unordered_interfaces_reported(self):
        data = variant(
            layers=[{"k": 1.5}, {"k": 2.0}, {"k": 2.5}],
            interfaces=[
                {"type": "cosine", "height": 0.6, "offset": 0.0},
                {"type": "cosine", "height": 0.6, "offset": 0.1},
            ],
        )
        with pytest.raises(ConfigError, match="interfaces"):
            config_from_dict(data)

    def test_bad_prefer(self):
        data = variant(wood={"prefer": "never"})
        with pytest.raises(ConfigError, match="wood.prefer"):
            config_from_dict(data)

    def test_bad_sweep_axis(self):
        data = variant(sweep={"axis": "k", "values": [1, 2]})
        with pytest.raises(ConfigError, match="sweep.axis"):
            config_from_dict(data)

    def test_resolved_echo_round_trips_defaults(self):
        echo = config_from_dict(BASE).resolved()
        assert echo["eta"] == 1.0
        assert echo["window"] == {"A": 20, "c1": 0.5}
        assert echo["wood"]["tol"] == 0.05
        assert echo["wood"]["prefer"] == "auto"
        assert echo["rayleigh_route"] == "line"

    def test_load_config_uses_filename_stem(self, tmp_path):
        path = tmp_path / "myrun.json"
        path.write_text(json.dumps(BASE))
        assert load_config(path).name == "myrun"


class TestRunDrivers:
    def test_solve_record_is_deterministic(self):
        cfg = config_from_dict(BASE)
        rec1, _ = run_solve(cfg)
        rec2, _ = run_solve(cfg)
        assert json.dumps(rec1, sort_keys=True) == json.dumps(rec2, sort_keys=True)

    def test_record_contents(self):
        rec, timings = run_solve(config_from_dict(BASE))
        assert rec["schema_version"] == 1
        assert rec["eps_1"] is None
        assert 0.0 <= rec["eps_en"] < 1e-6
        ups = {e["r"]: e for e in rec["rayleigh"]["up"]}
        assert ups[0]["classification"] == "propagating"
        assert rec["conditions"]["final"] > 1.0
        assert set(timings) == {"rtr", "sweep", "post"}
        # the record itself must not embed wall-clock values
        assert "timings" not in json.dumps(rec)

    def test_reference_self_comparison_is_zero(self, tmp_path):
        from qpscat.cli import write_record

        cfg = config_from_dict(BASE)
        rec, _ = run_solve(cfg)
        ref = tmp_path / "ref.json"
        write_record(rec, ref)
        rec2, _ = run_solve(cfg, reference=str(ref))
        assert rec2["eps_1"] == 0.0

    def test_single_value_sweep_matches_solve(self):
        cfg = config_from_dict(BASE)
        rows = run_sweep(cfg, "A", [20])
        rec, _ = run_solve(cfg)
        assert rows[0]["eps_en"] == rec["eps_en"]

    def test_sweep_values_must_ascend(self):
        cfg = config_from_dict(BASE)
        with pytest.raises(ConfigError, match="ascending"):
            run_sweep(cfg, "A", [40, 20])

    def test_sweep_m_axis_converges(self):
        cfg = config_from_dict(BASE)
        rows = run_sweep(cfg, "M", [16, 32])
        # the A = 20 periods window truncation floor dominates past M = 32
        assert rows[-1]["eps_en"] < 1e-6
        assert rows[-1]["eps_en"] < rows[0]["eps_en"]

    def test_sweep_h_axis_sets_signed_shifts(self):
        from qpscat.cli import _with_axis

        cfg = config_from_dict(variant(layers=[{"k": 1.5}, {"k": 2.0}, {"k": 2.5}],
                                       interfaces=[
                                           {"type": "cosine", "height": 0.6, "offset": 0.0},
                                           {"type": "cosine", "height": 0.6, "offset": -1.3},
                                       ]))
        out = _with_axis(cfg, "h", 1.4)
        assert out.shifts == (1.4, 1.4, -1.4)
        assert out.prefer == "shifted"

    def test_table_configs_all_load(self):
        for name in ("flat", "table1", "table2", "table3", "table4",
                     "table5", "table6", "table7", "table8"):
            cfg = table_config(name)
            assert cfg.name == name

    def test_unknown_table_name(self):
        with pytest.raises(ConfigError, match="table"):
            table_config("table99")

    def test_table_flat_runs(self):
        cfg, rows = run_table("flat")
        assert len(rows) == 1
        assert rows[0]["eps_en"] < 1e-10


class TestMainExitCodes:
    def test_solve_ok(self, tmp_path, capsys):
        path = tmp_path / "run.json"
        path.write_text(json.dumps(BASE))
        code = main(["solve", "--config", str(path), "--out", str(tmp_path)])
        assert code == EXIT_OK
        assert (tmp_path / "run_result.json").exists()
        assert "eps_en" in capsys.readouterr().out

    def test_missing_config_is_validation_error(self, tmp_path):
        assert main(["solve", "--config", str(tmp_path / "nope.json")]) == EXIT_CONFIG

    def test_invalid_schema_is_validation_error(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(variant(M=33)))
        assert main(["solve", "--config", str(path)]) == EXIT_CONFIG

    def test_plain_at_wood_is_numerical_breakdown(self, tmp_path):
        data = variant(layers=[{"k": 1.0}, {"k": 2.5}], wood={"prefer": "plain"})
        path = tmp_path / "wood.json"
        path.write_text(json.dumps(data))
        assert main(["solve", "--config", str(path)]) == EXIT_NUMERICAL

    def test_sweep_writes_csv(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps(BASE))
        code = main(["sweep", "--config", str(path), "--axis", "M",
                     "--values", "16,32", "--out", str(tmp_path)])
        assert code == EXIT_OK
        lines = (tmp_path / "run_sweep.csv").read_text().strip().splitlines()
        assert lines[0] == "axis,value,eps_en,eps_1,seconds"
        assert len(lines) == 3


class TestSelftest:
    def test_selftest_passes(self, capsys):
        assert run_selftest() is True
        out = capsys.readouterr().out
        assert "FAIL" not in out
        assert "quadrature-diagonal-fault-guard" in out

    def test_selftest_cli_exit_code(self):
        assert main(["selftest"]) == EXIT_OK
