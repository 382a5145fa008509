import numpy as np
import pytest

from eprldpc.channel import CodeSpec
from eprldpc.fixtures import girth6_code, ordering_codes
from eprldpc.gf import field
from eprldpc.io import ParseError, dumps, loads, read_code, specs_equal, write_code
from eprldpc.representation import NonBinaryMatrix, binary_image

# H = [alpha, 1] over GF(4). With x0 = a + b*alpha, x1 = alpha*x0 = b + (a+b)*alpha,
# so v1(1) = v0(2), v1(2) = v0(3) and v1(3) = v0(1); columns are 0-based j*3 + (j'-1).
HAND = """\
qalist v1
# a single GF(4) check
p 2
prim_poly 0x7
M 1
N 2
g_s 0
mode base
[H]
0: 0:1 1:0
[GENERATORS]
0: 7
1: 7
[SELECTORS]
0 0: 1 2 3
0 1: 1 2 3
[OMEGA_E]
0 omega_row 0 1: 1 3
1 omega_row 0 2: 2 4
2 omega_row 0 3: 0 5
[END]
"""


def test_hand_written_file():
    spec = loads(HAND)
    ref = CodeSpec.from_image(binary_image(NonBinaryMatrix(field(2), np.array([[2, 1]]))))
    assert specs_equal(spec, ref)
    assert spec.meta == {"g_s": 0, "mode": "base"}
    assert spec.img.matrix.to_dense().tolist() == [[0, 1, 1, 0], [1, 1, 0, 1]]


@pytest.mark.parametrize("make", [girth6_code, lambda: ordering_codes(60)[0]])
def test_round_trip(make, tmp_path):
    spec = make()
    path = tmp_path / "code.qalist"
    write_code(spec, path)
    back = read_code(path)
    assert specs_equal(spec, back)
    assert dumps(back) == dumps(spec)


def test_truncated_file_names_section():
    text = HAND.split("[OMEGA_E]")[0]
    with pytest.raises(ParseError) as exc:
        loads(text)
    assert exc.value.section == "[SELECTORS]"
    assert "truncated" in str(exc.value)


@pytest.mark.parametrize("bad, section", [
    (HAND.replace("qalist v1", "qalist v2"), "header"),
    (HAND.replace("p 2\n", "p 2 3\n"), "header"),
    (HAND.replace("0: 0:1 1:0", "0: 0:5 1:0"), "[H]"),
    (HAND.replace("1: 7\n", "1: f\n"), "[GENERATORS]"),
    (HAND.replace("0 omega_row 0 1", "0 bogus 0 1"), "[OMEGA_E]"),
    (HAND.replace("2 omega_row 0 3: 0 5", "2 omega_row 0 3: 0 9"), "[OMEGA_E]"),
])
def test_malformed(bad, section):
    with pytest.raises(ParseError) as exc:
        loads(bad)
    assert exc.value.section == section
    assert exc.value.line >= 1


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        read_code(tmp_path / "nope")
