"""Reader for the Eclipse-UML2-style XMI subset used by quantum UML profiles.

Supported shape::

    <xmi:XMI>
      <uml:Model>
        <packagedElement xmi:type="uml:Activity" name="Circuit">
          <partition xmi:id="p0" name="q0"/>          one per qubit
          <node xmi:type="uml:OpaqueAction" xmi:id="n1" inPartition="p0"/>
          <edge xmi:type="uml:ControlFlow" source="n1" target="n2"/>
        </packagedElement>
        <packagedElement xmi:type="uml:Class" name="Helper">   classical
          <ownedOperation name="run"/>
        </packagedElement>
      </uml:Model>
      <Quantum:HadamardGate base_OpaqueAction="n1"/>   stereotype application
    </xmi:XMI>

A stereotype applied to an action inside the circuit activity must name a
supported gate (looked up case-insensitively in the alias table). Operands
come from ``control``/``target`` attributes on the stereotype application or
the action (space-separated partition ids); without them the action's
``inPartition`` list is split, controls first. Rotation angles are read from
an ``angle``/``theta``/``parameter`` attribute.
"""

from __future__ import annotations

import heapq
import re
import xml.etree.ElementTree as ET

from ._assets import stereotype_alias_table
from .circuit import ARITY, SINGLE_QUBIT, ROTATIONS, GateApplication, GateKind, build_model
from .errors import DanglingReference, MalformedInput, UnsupportedElement

_CIRCUIT_STEREOTYPES = {"quantumcircuit", "circuit", "quantumprogram"}
_CLASSICAL_TYPES = {"Class", "Interface", "Operation", "Property"}
_PARAM_ATTRS = ("angle", "theta", "parameter", "param", "phi")


def _local(name: str) -> str:
    return name.rsplit("}", 1)[-1]


def _ns(name: str) -> str:
    return name[1:].split("}", 1)[0] if name.startswith("{") else ""


def _attr(elem, local_name):
    for key, value in elem.attrib.items():
        if _local(key) == local_name:
            return value
    return None


def _xmi_type(elem):
    for key, value in elem.attrib.items():
        if key.startswith("{") and _local(key) == "type":
            return value.split(":", 1)[-1]
    return None


def _norm(name: str) -> str:
    return re.sub(r"[^0-9a-z]", "", name.lower())


def _is_profile_ns(uri: str) -> bool:
    low = uri.lower()
    return not any(tag in low for tag in ("omg.org/spec/xmi", "omg.org/spec/uml", "eclipse.org/uml2", "schema.omg.org", "eclipse.org/emf"))


def _resolve_kind(stereotype: str, aliases: dict) -> GateKind | None:
    key = _norm(stereotype)
    if key in aliases:
        return GateKind.lookup(aliases[key])
    if key.endswith("gate") and key[: -len("gate")] in aliases:
        return GateKind.lookup(aliases[key[: -len("gate")]])
    return None


def parse_xmi(source: bytes | str, stereotype_aliases: dict | None = None):
    aliases = stereotype_alias_table()
    if stereotype_aliases:
        aliases.update({_norm(k): v for k, v in stereotype_aliases.items()})
    try:
        root = ET.fromstring(source)
    except ET.ParseError as exc:
        raise MalformedInput(f"not well-formed XML: {exc}") from None

    # stereotype applications: profile-namespace elements with a base_* reference
    applied: dict[str, list[ET.Element]] = {}
    for elem in root.iter():
        if not _is_profile_ns(_ns(elem.tag)) or not _ns(elem.tag):
            continue
        for key, value in elem.attrib.items():
            if _local(key).startswith("base_"):
                applied.setdefault(value, []).append(elem)

    activities = [e for e in root.iter() if _xmi_type(e) == "Activity"]
    circuit = None
    for act in activities:
        stereos = {_norm(_local(s.tag)) for s in applied.get(_attr(act, "id"), [])}
        if stereos & _CIRCUIT_STEREOTYPES:
            circuit = act
            break
    if circuit is None:
        circuit = next((a for a in activities if any(_local(c.tag) == "partition" for c in a)), None)
    if circuit is None:
        raise MalformedInput("no activity with partitions found; cannot identify the circuit")

    name = circuit.get("name") or "circuit"
    partitions = [c for c in circuit if _local(c.tag) == "partition"]
    part_index: dict[str, int] = {}
    part_names = []
    for pos, part in enumerate(partitions):
        pid = _attr(part, "id")
        pname = part.get("name") or f"q{pos}"
        if pid is None:
            raise MalformedInput(f"partition {pname!r} has no xmi:id")
        part_index[pid] = pos
        part_names.append(pname)

    nodes = [c for c in circuit if _local(c.tag) == "node"]
    node_ids = [_attr(n, "id") for n in nodes]
    order = _topological_order(circuit, node_ids)

    by_id = dict(zip(node_ids, nodes))
    gates = []
    for seq, node_id in enumerate(order):
        node = by_id[node_id]
        stereos = applied.get(node_id, [])
        if not stereos:
            continue
        for stereo in stereos:
            label = _local(stereo.tag)
            kind = _resolve_kind(label, aliases)
            if kind is None:
                raise UnsupportedElement(
                    f"unsupported stereotype {label!r} on node {node.get('name') or node_id!r}"
                )
            gates.append(_gate_from_node(kind, node, stereo, part_index, seq))

    circuit_ids = {id(e) for e in circuit.iter()}
    classical = []
    for elem in root.iter():
        if id(elem) in circuit_ids:
            continue
        if _xmi_type(elem) in _CLASSICAL_TYPES or _local(elem.tag) in ("ownedOperation", "ownedAttribute"):
            ename = elem.get("name")
            if ename:
                classical.append(ename)

    return build_model(name, part_names, gates, classical)


def _topological_order(activity, node_ids):
    """Kahn's algorithm over activity edges; document order breaks ties."""
    position = {nid: i for i, nid in enumerate(node_ids)}
    if None in position:
        raise MalformedInput("activity node without xmi:id")
    succ = {nid: [] for nid in node_ids}
    indegree = dict.fromkeys(node_ids, 0)
    for edge in activity:
        if _local(edge.tag) != "edge":
            continue
        src, dst = edge.get("source"), edge.get("target")
        for ref in (src, dst):
            if ref not in position:
                raise DanglingReference(f"edge {_attr(edge, 'id')!r} references unknown node {ref!r}")
        succ[src].append(dst)
        indegree[dst] += 1
    heap = [position[n] for n in node_ids if indegree[n] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        nid = node_ids[heapq.heappop(heap)]
        order.append(nid)
        for nxt in succ[nid]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                heapq.heappush(heap, position[nxt])
    if len(order) != len(node_ids):
        raise MalformedInput("activity edges contain a cycle")
    return order


def _ref_list(value, part_index, label):
    out = []
    for ref in (value or "").split():
        if ref not in part_index:
            raise DanglingReference(f"{label} references undeclared partition {ref!r}")
        out.append(part_index[ref])
    return out


def _gate_from_node(kind, node, stereo, part_index, seq):
    label = f"node {node.get('name') or _attr(node, 'id')!r}"

    def lookup(*names):
        for holder in (stereo, node):
            for n in names:
                value = _attr(holder, n)
                if value is not None:
                    return value
        return None

    n_controls, _ = ARITY.get(kind, SINGLE_QUBIT)
    controls = _ref_list(lookup("control", "controls"), part_index, label)
    targets = _ref_list(lookup("target", "targets"), part_index, label)
    if not controls and not targets:
        in_parts = _ref_list(node.get("inPartition"), part_index, label)
        controls, targets = in_parts[:n_controls], in_parts[n_controls:]

    parameter = None
    if kind in ROTATIONS:
        raw = lookup(*_PARAM_ATTRS)
        if raw is None:
            raise MalformedInput(f"{label}: rotation {kind.value} has no angle attribute")
        try:
            parameter = float(raw)
        except ValueError:
            raise MalformedInput(f"{label}: angle {raw!r} is not a number") from None
    return GateApplication(kind, tuple(targets), tuple(controls), parameter, seq)
