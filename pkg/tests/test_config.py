import pytest

from chipgravity import ConfigurationError
from chipgravity.config import SCHEMA, build_rabi, parse_config, schema_table

ARRAY = """
[array]
critical_current = 5e-6
ground_capacitance = 1e-15
junction_capacitance = 1e-16
cell_length = 1e-6
"""

RABI = """
[rabi]
cavity_frequency = 2e10
qubit_gap = 2.3200579988215444e-24
coupling = 2e9
modulation = 2e4
cavity_decay = 1e5
qubit_decay = 1e5
n_fock = 4
"""


def error_key(text):
    with pytest.raises(ConfigurationError) as err:
        parse_config(text)
    return err.value.key


def test_minimal_config_fills_defaults():
    cfg = parse_config('experiment = "hawking"\n' + ARRAY)
    assert cfg.section("array")["num_cells"] == 4096
    assert cfg.output_dir == "out" and cfg.seed == 0
    assert len(cfg.sha256) == 64


def test_unknown_section_key_and_top_level_rejected():
    assert error_key('experiment = "hawking"\n' + ARRAY + "[arrays]\nx = 1\n") == "[arrays]"
    assert error_key('experiment = "hawking"\n' + ARRAY + "critical_curent = 1.0\n") == "array.critical_curent"
    assert error_key('experiment = "hawking"\nsead = 3\n' + ARRAY) == "sead"


def test_missing_and_misplaced_sections():
    assert error_key('experiment = "horizon"\n' + ARRAY) == "[front]"
    assert error_key('experiment = "hawking"\n' + ARRAY + RABI) == "[rabi]"
    assert error_key('experiment = "teleport"\n' + ARRAY) == "experiment"
    assert error_key(ARRAY) == "experiment"


def test_required_key_named():
    text = 'experiment = "hawking"\n' + ARRAY.replace("cell_length = 1e-6\n", "")
    assert error_key(text) == "array.cell_length"


def test_types_checked():
    assert error_key('experiment = "hawking"\n' + ARRAY.replace("1e-6", '"1um"')) == "array.cell_length"
    assert error_key('experiment = "hawking"\n' + ARRAY + "num_cells = 10.5\n") == "array.num_cells"


def test_physical_range_errors_name_the_section():
    front = "[front]\namplitude = 0.6\nfront_speed = 0.95\nramp_width = 5.0\n"
    assert error_key('experiment = "horizon"\n' + ARRAY + front) == "[front]"


def test_parse_error_reports_location():
    with pytest.raises(ConfigurationError, match="line"):
        parse_config('experiment = "hawking"\n[array\n')


def test_lattice_needs_packet_or_standing_mode():
    base = 'experiment = "lattice"\n' + ARRAY + "[lattice]\nflux_bias = 0.0\n"
    assert error_key(base) == "[packet]"
    sponge = base + "standing_mode = 3\n[simulation]\nboundary = \"sponge\"\n"
    assert error_key(sponge) == "simulation.boundary"
    parse_config(base + "standing_mode = 3\n[simulation]\nboundary = \"fixed\"\n")


def test_unruh_without_circuit_needs_explicit_constants():
    text = 'experiment = "unruh-steady"\n' + RABI.replace("coupling = 2e9\n", "")
    assert error_key(text) == "rabi.coupling"


def test_sweep_grid_checked():
    base = 'experiment = "unruh-sweep"\n' + RABI + "[sweep]\ngrid_min = 2.0\ngrid_max = 2.2\n"
    parse_config(base)
    assert error_key(base + "grid_step = 0.01\n") == "sweep.grid_step"
    assert error_key(base.replace("grid_max = 2.2", "grid_max = 1.9")) == "sweep.grid_max"


def test_rabi_defaults_to_sum_frequency():
    cfg = parse_config('experiment = "unruh-sweep"\n' + RABI + "[sweep]\ngrid_min = 2.0\ngrid_max = 2.2\n")
    assert build_rabi(cfg).drive_frequency == pytest.approx(2.1)


def test_every_schema_key_documented():
    table = schema_table()
    for section, keys in SCHEMA.items():
        assert f"[{section}]" in table
        for key, spec in keys.items():
            assert key in table and spec.unit
