import pytest

from qmdgen.circuit import GateKind, canonical_text, expected_inventory, load_model, parse_model
from qmdgen.errors import DanglingReference, MalformedInput, UnsupportedElement

from conftest import FIXTURES

HEAD = """<?xml version="1.0"?>
<xmi:XMI xmlns:xmi="http://www.omg.org/spec/XMI/20131001" xmlns:uml="http://www.eclipse.org/uml2/5.0.0/UML"
         xmlns:Q="http://example.org/quantum">
<uml:Model name="M">
<packagedElement xmi:type="uml:Activity" xmi:id="a" name="c">
<partition xmi:id="p0" name="q0"/><partition xmi:id="p1" name="q1"/>
"""


def doc(body, stereo):
    return (HEAD + body + "</packagedElement></uml:Model>" + stereo + "</xmi:XMI>").encode()


@pytest.mark.parametrize("name", ["bell", "teleport"])
def test_xmi_matches_json_fixture(name):
    xmi = load_model(FIXTURES / "xmi" / f"{name}.xmi")
    js = load_model(FIXTURES / "models" / f"{name}.json")
    assert expected_inventory(xmi) == expected_inventory(js)
    assert [g.kind for g in xmi.gates] == [g.kind for g in js.gates]


def test_xmi_reparse_is_stable():
    data = (FIXTURES / "xmi" / "teleport.xmi").read_bytes()
    assert canonical_text(parse_model(data, "xmi")) == canonical_text(parse_model(data, "xmi"))


def test_topological_order_with_document_tiebreak():
    body = """<node xmi:type="uml:OpaqueAction" xmi:id="b" inPartition="p1"/>
<node xmi:type="uml:OpaqueAction" xmi:id="a1" inPartition="p0"/>
<node xmi:type="uml:OpaqueAction" xmi:id="c" inPartition="p0"/>
<edge source="a1" target="c"/>"""
    stereo = '<Q:X base_OpaqueAction="b"/><Q:Hadamard base_OpaqueAction="a1"/><Q:Z base_OpaqueAction="c"/>'
    m = parse_model(doc(body, stereo), "xmi")
    assert [g.kind for g in m.gates] == [GateKind.X, GateKind.H, GateKind.Z]


def test_cycle_is_malformed():
    body = """<node xmi:type="uml:OpaqueAction" xmi:id="n1" inPartition="p0"/>
<node xmi:type="uml:OpaqueAction" xmi:id="n2" inPartition="p0"/>
<edge source="n1" target="n2"/><edge source="n2" target="n1"/>"""
    with pytest.raises(MalformedInput):
        parse_model(doc(body, '<Q:H base_OpaqueAction="n1"/><Q:H base_OpaqueAction="n2"/>'), "xmi")


def test_unknown_stereotype_named_in_error():
    body = '<node xmi:type="uml:OpaqueAction" xmi:id="n1" name="weird" inPartition="p0"/>'
    with pytest.raises(UnsupportedElement, match="Frobnicate"):
        parse_model(doc(body, '<Q:Frobnicate base_OpaqueAction="n1"/>'), "xmi")


def test_dangling_partition():
    body = '<node xmi:type="uml:OpaqueAction" xmi:id="n1" inPartition="p0"/>'
    with pytest.raises(DanglingReference):
        parse_model(doc(body, '<Q:H base_OpaqueAction="n1" target="p9"/>'), "xmi")


def test_rotation_angle_and_alias_override():
    body = '<node xmi:type="uml:OpaqueAction" xmi:id="n1" inPartition="p1"/>'
    m = parse_model(doc(body, '<Q:Spin base_OpaqueAction="n1" theta="0.7854"/>'), "xmi", {"spin": "RZ"})
    assert m.gates[0].kind is GateKind.RZ and m.gates[0].parameter == pytest.approx(0.7854)
    assert m.gates[0].targets == (1,)


def test_not_xml_is_malformed():
    with pytest.raises(MalformedInput):
        parse_model(b"<xmi:XMI", "xmi")
