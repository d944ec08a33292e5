"""Prompt assembly from editable template assets.

A template file has a ``version:`` line, then a ``[system]`` section and a
``[user]`` section. The user section carries the ``{{CONTEXT}}`` and
``{{MODEL}}`` slots.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass
from pathlib import Path

from ._assets import asset_text
from .errors import EmptyModelText


class PromptKind(str, enum.Enum):
    GENERIC = "generic"
    SPECIFIC = "specific"


@dataclass(frozen=True)
class Template:
    version: str
    system: str
    user: str


@dataclass(frozen=True)
class Prompt:
    system_text: str
    user_text: str
    kind: PromptKind
    context_ids: tuple[str, ...] = ()
    template_version: str = "1"

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.system_text.encode("utf-8"))
        h.update(b"\0")
        h.update(self.user_text.encode("utf-8"))
        return h.hexdigest()


def parse_template(text: str) -> Template:
    version = None
    sections: dict[str, list[str]] = {}
    current = None
    for line in text.splitlines():
        if current is None and version is None and line.startswith("version:"):
            version = line.split(":", 1)[1].strip()
        elif line.strip() in ("[system]", "[user]"):
            current = line.strip()[1:-1]
            sections[current] = []
        elif current is not None:
            sections[current].append(line)
    if version is None or "system" not in sections or "user" not in sections:
        raise ValueError("template needs a version line and [system]/[user] sections")
    user = "\n".join(sections["user"])
    if "{{MODEL}}" not in user:
        raise ValueError("template [user] section lacks the {{MODEL}} slot")
    return Template(version, "\n".join(sections["system"]).strip() + "\n", user.rstrip("\n") + "\n")


def load_template(kind: PromptKind | str, template_dir=None) -> Template:
    kind = PromptKind(kind)
    if template_dir is not None:
        path = Path(template_dir) / f"{kind.value}.txt"
        if path.is_file():
            return parse_template(path.read_text(encoding="utf-8"))
    return parse_template(asset_text(f"templates/{kind.value}.txt"))


CONTEXT_BEGIN = "Context (retrieved examples, most relevant first):\n=== BEGIN CONTEXT ==="
CONTEXT_END = "=== END CONTEXT ==="


def render_context(context) -> str:
    if not context:
        return ""
    parts = [CONTEXT_BEGIN]
    for chunk in sorted(context, key=lambda c: c.rank):
        parts.append(f"--- [{chunk.chunk_id}] ---")
        parts.append(chunk.text.rstrip("\n"))
    parts.append(CONTEXT_END)
    return "\n".join(parts) + "\n\n"


def build_prompt(model_text: str, kind: PromptKind | str, context=(), template_dir=None) -> Prompt:
    """Fill the template for ``kind`` with the model text and retrieved
    chunks (``ScoredChunk`` with ``text``), placing context before the model."""
    if not model_text or not model_text.strip():
        raise EmptyModelText("model text is empty")
    kind = PromptKind(kind)
    template = load_template(kind, template_dir)
    ordered = sorted(context, key=lambda c: c.rank)
    # single-pass substitution so slot-like text inside chunks is never expanded
    user = template.user.replace("{{CONTEXT}}", "\0CTX\0").replace("{{MODEL}}", "\0MDL\0")
    user = user.replace("\0CTX\0", render_context(ordered).replace("\0", ""))
    user = user.replace("\0MDL\0", model_text)
    return Prompt(template.system, user, kind, tuple(c.chunk_id for c in ordered), template.version)
