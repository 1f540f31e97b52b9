import math

import pytest

from quenchmap import ConfigError, load_fixture, parse_config, parse_text
from quenchmap.config import fixture_path

BASE = """\
grid.xmin = -10
grid.xmax = 10
grid.n = 256
times = 0, 0.5
packet.1.sigma0 = 1
"""


def test_fig2_fixture_matches_figure_values():
    s = load_fixture("fig2")
    assert s.kind == "trap"
    assert s.params.hbar == 1 and s.params.mass == 1
    assert s.post_trap.spring_constant == 5 and s.pre_trap is None
    assert s.quench_time == 0
    (a, wa), (b, wb) = s.initial.components
    assert (a.sigma0, a.x0, a.p0) == (1.5, 0.0, 4.0)
    assert (b.sigma0, b.x0, b.p0) == (1.5, 0.0, -4.0)
    assert wa == wb == 1
    assert s.grid.x_min == -20 and s.grid.x_max == 20 and s.grid.n_points == 2048


@pytest.mark.parametrize("name,kind", [("fig1", "free"), ("fig2", "trap"),
                                       ("release", "release"), ("quench_k_to_K", "retrap")])
def test_fixture_kinds(name, kind):
    assert load_fixture(name).kind == kind
    assert fixture_path(name + ".cfg").exists()


def test_defaults_and_weights():
    s = parse_text(BASE + "packet.1.weight_im = 2\n")
    assert s.params.hbar == 1.0 and s.params.mass == 1.0
    assert s.initial.components[0][1] == complex(1, 2)
    assert s.sample_times == (0.0, 0.5)


def test_negative_mass_names_field():
    with pytest.raises(ConfigError) as info:
        parse_text("mass = -1\n" + BASE)
    assert info.value.field == "mass" and info.value.line == 1
    assert "mass" in str(info.value)


def test_duplicate_key_cites_both_lines():
    with pytest.raises(ConfigError) as info:
        parse_text(BASE + "grid.n = 512\n")
    assert info.value.line == 6
    assert "line 3" in str(info.value) and "line 6" in str(info.value)


@pytest.mark.parametrize("extra,field", [
    ("colour = blue\n", "colour"),
    ("packet.1.spin = 1\n", "packet.1.spin"),
])
def test_unknown_keys(extra, field):
    with pytest.raises(ConfigError) as info:
        parse_text(BASE + extra)
    assert info.value.field == field


@pytest.mark.parametrize("old,new,field", [
    ("grid.n = 256", "grid.n = 300", "grid.n"),
    ("grid.xmax = 10", "grid.xmax = -20", "grid.xmax"),
    ("times = 0, 0.5", "times = ", "times"),
    ("times = 0, 0.5", "times = 0.5, 0.2", "times"),
    ("times = 0, 0.5", "times = -1, 0", "times"),
    ("times = 0, 0.5", "times = 0, nan", "times"),
    ("packet.1.sigma0 = 1", "packet.1.sigma0 = 0", "packet.1.sigma0"),
    ("packet.1.sigma0 = 1", "packet.1.x0 = 1", "packet.1.sigma0"),
])
def test_validation_errors(old, new, field):
    with pytest.raises(ConfigError) as info:
        parse_text(BASE.replace(old, new))
    assert info.value.field == field


def test_syntax_error_has_line():
    with pytest.raises(ConfigError) as info:
        parse_text(BASE + "just words\n")
    assert info.value.line == 6


def test_comments_and_blank_lines():
    s = parse_text("# header\n\n" + BASE.replace("grid.n = 256", "grid.n = 256  # points"))
    assert s.grid.n_points == 256


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "absent.cfg")


def test_bad_spring_constant():
    with pytest.raises(ConfigError) as info:
        parse_text(BASE + "post_trap.k = 0\n")
    assert info.value.field == "post_trap.k"


def test_quench_time_validation():
    with pytest.raises(ConfigError) as info:
        parse_text(BASE + "post_trap.k = 1\nquench_time = -1\n")
    assert info.value.field == "quench_time"
    assert math.isclose(parse_text(BASE + "quench_time = 0.25\n").quench_time, 0.25)
