import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fpd.diagram import (
    DiagramFormatError,
    DiagramSet,
    PersistenceDiagram,
    cap_infinities,
    default_cap,
    distance_to_diagonal,
    read_diagram,
    write_diagram,
)

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@st.composite
def diagrams(draw, allow_inf=False, max_size=12):
    n = draw(st.integers(0, max_size))
    pts = []
    for _ in range(n):
        b = draw(finite)
        if allow_inf and draw(st.booleans()):
            pts.append((b, math.inf))
        else:
            pts.append((b, b + draw(st.floats(1e-6, 1e3))))
    return PersistenceDiagram(draw(st.integers(0, 3)), np.array(pts).reshape(-1, 2))


def test_distance_to_diagonal():
    assert distance_to_diagonal((0.0, 2.0)) == pytest.approx(math.sqrt(2))
    assert distance_to_diagonal((1.0, 1.0)) == 0.0
    np.testing.assert_allclose(distance_to_diagonal(np.array([[0, 1], [1, 3]])), [1 / math.sqrt(2), math.sqrt(2)])
    with pytest.raises(ValueError):
        distance_to_diagonal((0.0, math.inf))


def test_zero_persistence_points_are_dropped():
    d = PersistenceDiagram(1, [(0.5, 0.5), (0.1, 0.4)])
    assert len(d) == 1
    assert d.points.tolist() == [[0.1, 0.4]]


@pytest.mark.parametrize("pts, msg", [
    ([(0.5, 0.2)], "birth > death"),
    ([(math.nan, 1.0)], "NaN"),
    ([(-math.inf, 1.0)], "finite"),
])
def test_invalid_points_rejected(pts, msg):
    with pytest.raises(ValueError, match=msg):
        PersistenceDiagram(0, pts)


def test_points_are_read_only():
    d = PersistenceDiagram(1, [(0, 1)])
    with pytest.raises(ValueError):
        d.points[0, 0] = 5


def test_empty_diagram():
    d = PersistenceDiagram(2)
    assert len(d) == 0 and d.points.shape == (0, 2)
    assert d.is_finite and d.max_finite_death() is None


def test_cap_infinities():
    d = PersistenceDiagram(0, [(0, 1), (0, math.inf)])
    c = cap_infinities(d, 3.0)
    assert c.points.tolist() == [[0, 1], [0, 3]]
    assert c.cap == 3.0 and c.is_finite
    with pytest.raises(ValueError, match="exceed"):
        cap_infinities(d, 1.0)
    with pytest.raises(ValueError):
        cap_infinities(d, math.inf)


def test_default_cap_is_twice_max_finite_death():
    ds = [PersistenceDiagram(0, [(0, 1.5), (0, math.inf)]), PersistenceDiagram(0, [(0, 0.5)])]
    assert default_cap(ds) == 3.0
    assert default_cap([PersistenceDiagram(0, [(0, math.inf)])]) == 1.0


def test_capped_diagram_cannot_exceed_cap():
    with pytest.raises(ValueError):
        PersistenceDiagram(0, [(0, 2)], cap=1.0)


def test_diagram_set_checks():
    a = PersistenceDiagram(1, [(0, 1)])
    with pytest.raises(ValueError):
        DiagramSet([])
    with pytest.raises(ValueError, match="mix"):
        DiagramSet([a, PersistenceDiagram(0, [(0, 1)])])
    with pytest.raises(ValueError):
        DiagramSet([a], names=["x", "y"])
    s = DiagramSet([a, PersistenceDiagram(1, [(0, math.inf)])], ["p", "q"])
    assert s.names == ["p", "q"] and s.dim == 1
    assert s.capped()[1].points.tolist() == [[0, 2.0]]


@given(diagrams(allow_inf=True))
def test_csv_round_trip_is_bit_exact(tmp_path_factory, d):
    path = tmp_path_factory.mktemp("rt") / "d.csv"
    write_diagram(d, path)
    back = read_diagram(path)
    assert back.dim == d.dim
    assert np.array_equal(back.points, d.points)


@given(diagrams(allow_inf=True))
def test_json_round_trip_is_bit_exact(tmp_path_factory, d):
    path = tmp_path_factory.mktemp("rt") / "d.json"
    write_diagram(d, path)
    assert read_diagram(path) == d


def test_json_keeps_cap(tmp_path):
    d = cap_infinities(PersistenceDiagram(0, [(0, math.inf), (0, 1)]), 4.0)
    write_diagram(d, tmp_path / "d.json")
    assert read_diagram(tmp_path / "d.json").cap == 4.0


def test_csv_without_header_and_inf(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("0,0,inf\n0,0,1.5\n\n")
    d = read_diagram(p)
    assert d.dim == 0 and len(d) == 2 and not d.is_finite


def test_csv_multiple_degrees_need_selection(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("dim,birth,death\n0,0,1\n1,0.2,0.5\n1,0.3,0.4\n")
    with pytest.raises(DiagramFormatError, match="select"):
        read_diagram(p)
    assert len(read_diagram(p, dim=1)) == 2
    assert len(read_diagram(p, dim=2)) == 0


@pytest.mark.parametrize("text, line", [
    ("dim,birth,death\n1,0,1\n1,0.5\n", 3),
    ("1,0,1\n1,x,2\n", 2),
    ("1,0,1\n1,3,2\n", 2),
    ("1,0,1\n1,0,1\nz,0,1\n", 3),
])
def test_csv_errors_report_line(tmp_path, text, line):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(DiagramFormatError) as e:
        read_diagram(p)
    assert e.value.line == line
    assert f"line {line}" in str(e.value)


def test_bad_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(DiagramFormatError):
        read_diagram(p)
    p.write_text('{"dim": 1, "points": [[0, 1, 2]]}')
    with pytest.raises(DiagramFormatError, match="pair"):
        read_diagram(p)


def test_unknown_format(tmp_path):
    with pytest.raises(DiagramFormatError):
        read_diagram(tmp_path / "x.txt")
