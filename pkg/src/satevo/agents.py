"""Agent backends: the scripted replay used everywhere, plus a thin HTTP client.

The orchestrator talks to "an agent" through two calls per cycle: plan()
gets a freeform directive, code() gets the concrete file edits. The
scripted backend replays a fixed sequence of steps from a JSON file, which
is what makes whole evolution runs reproducible; the HTTP backend forwards
the same two calls to a remote endpoint for live experiments.

Edits are confined to the candidate's workspace: any path that escapes the
variant directory (absolute, or sneaking out via ..) is a hard reject.
"""

from __future__ import annotations

import hashlib
import json
import logging
import socket
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

log = logging.getLogger(__name__)


class AgentError(Exception):
    pass


class BackendUnavailable(AgentError):
    pass


class BackendTimeout(AgentError):
    pass


class ReplayExhausted(AgentError):
    """The scripted step sequence has no more cycles to offer."""


class EditOutsideWorkspace(AgentError):
    pass


@dataclass(frozen=True)
class AgentPatchSet:
    """One cycle's proposed change: file edits plus the written rationale."""

    edits: Tuple[Tuple[str, str], ...]  # (relative path, full new content)
    hypothesis: str
    intent: str = ""

    @property
    def digest(self) -> str:
        h = hashlib.sha256()
        for path, content in sorted(self.edits):
            h.update(path.encode())
            h.update(b"\0")
            h.update(content.encode())
            h.update(b"\0")
        h.update(self.hypothesis.encode())
        return h.hexdigest()

    @property
    def empty(self) -> bool:
        return not self.edits


@dataclass
class AgentContext:
    """Everything the agent sees when asked for the next plan."""

    rule_summary: str
    rule_versions: Dict[str, int]
    objective: str
    champion_report: Optional[dict] = None
    last_feedback: str = ""
    lineage: str = ""
    seed_standings: str = ""

    def to_json_dict(self) -> dict:
        return {
            "rule_summary": self.rule_summary,
            "rule_versions": dict(sorted(self.rule_versions.items())),
            "objective": self.objective,
            "champion_report": self.champion_report,
            "last_feedback": self.last_feedback,
            "lineage": self.lineage,
            "seed_standings": self.seed_standings,
        }


def _parse_edits(raw: Sequence[dict]) -> Tuple[Tuple[str, str], ...]:
    edits = []
    for item in raw:
        edits.append((str(item["path"]), str(item["content"])))
    return tuple(edits)


class ScriptedBackend:
    """Deterministic replay of recorded agent steps.

    Step format (one JSON object per cycle):
        {"plan": "...", "edits": [{"path": "src/solver.c", "content": "..."}],
         "hypothesis": "...", "intent": "..."}

    plan() peeks at the current step; code() consumes it. Asking for a plan
    after the sequence is exhausted raises ReplayExhausted, which the
    orchestrator treats as a clean end of the run.
    """

    def __init__(self, steps: Sequence[dict]) -> None:
        self._steps: List[dict] = list(steps)
        self._cursor = 0

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedBackend":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        steps = data["steps"] if isinstance(data, dict) else data
        return cls(steps)

    @property
    def remaining(self) -> int:
        return len(self._steps) - self._cursor

    @property
    def cursor(self) -> int:
        return self._cursor

    def seek(self, cursor: int) -> None:
        """Fast-forward a replay (used when resuming an interrupted run)."""
        if cursor < 0 or cursor > len(self._steps):
            raise ValueError(f"cursor {cursor} outside replay of {len(self._steps)} steps")
        self._cursor = cursor

    def plan(self, context: AgentContext) -> str:
        if self._cursor >= len(self._steps):
            raise ReplayExhausted(f"scripted backend exhausted after {self._cursor} steps")
        return str(self._steps[self._cursor].get("plan", ""))

    def code(self, plan: str, workspace_root: Path) -> AgentPatchSet:
        if self._cursor >= len(self._steps):
            raise ReplayExhausted(f"scripted backend exhausted after {self._cursor} steps")
        step = self._steps[self._cursor]
        self._cursor += 1
        return AgentPatchSet(
            edits=_parse_edits(step.get("edits", [])),
            hypothesis=str(step.get("hypothesis", "")),
            intent=str(step.get("intent", "")),
        )


class HttpBackend:
    """Minimal JSON-over-HTTP agent client.

    POST {base}/plan   body {"context": {...}}         -> {"plan": "..."}
    POST {base}/code   body {"plan": "...",
                             "manifest": {...}}        -> {"edits": [...],
                                                           "hypothesis": "...",
                                                           "intent": "..."}
    """

    def __init__(self, base_url: str, timeout: float = 120.0) -> None:
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def _post(self, route: str, payload: dict) -> dict:
        req = urllib.request.Request(
            f"{self.base_url}/{route}",
            data=json.dumps(payload).encode("utf-8"),
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                if resp.status != 200:
                    raise BackendUnavailable(f"{route}: HTTP {resp.status}")
                return json.loads(resp.read().decode("utf-8"))
        except (socket.timeout, TimeoutError) as exc:
            raise BackendTimeout(f"{route}: {exc}") from None
        except urllib.error.URLError as exc:
            if isinstance(exc.reason, (socket.timeout, TimeoutError)):
                raise BackendTimeout(f"{route}: {exc.reason}") from None
            raise BackendUnavailable(f"{route}: {exc.reason}") from None
        except urllib.error.HTTPError as exc:
            raise BackendUnavailable(f"{route}: HTTP {exc.code}") from None

    def plan(self, context: AgentContext) -> str:
        return str(self._post("plan", {"context": context.to_json_dict()})["plan"])

    def code(self, plan: str, workspace_root: Path) -> AgentPatchSet:
        reply = self._post(
            "code", {"plan": plan, "manifest": build_manifest(workspace_root)}
        )
        return AgentPatchSet(
            edits=_parse_edits(reply.get("edits", [])),
            hypothesis=str(reply.get("hypothesis", "")),
            intent=str(reply.get("intent", "")),
        )


def build_manifest(root: Path) -> dict:
    """Compact listing of a variant tree for the remote coding call."""
    root = Path(root)
    files = []
    for p in sorted(root.rglob("*")):
        if p.is_file():
            files.append({"path": str(p.relative_to(root)), "bytes": p.stat().st_size})
    return {"files": files}


def _confine(root: Path, relative: str) -> Path:
    """Resolve an edit path, refusing anything outside the workspace."""
    if Path(relative).is_absolute():
        raise EditOutsideWorkspace(f"absolute edit path: {relative}")
    root = root.resolve()
    target = (root / relative).resolve()
    if root != target and root not in target.parents:
        raise EditOutsideWorkspace(f"edit escapes workspace: {relative}")
    return target


def apply_patchset(patchset: AgentPatchSet, workspace_root: Path) -> List[str]:
    """Write a patch set into a variant workspace; returns the paths touched.

    The hypothesis text lands in HYPOTHESIS.md (the current cycle's plan
    replaces the previous one; history lives in CHANGELOG.md). All paths are
    validated before the first byte is written, so a bad patch set leaves
    the workspace untouched.
    """
    root = Path(workspace_root)
    resolved = [(rel, _confine(root, rel), content) for rel, content in patchset.edits]
    touched = []
    for rel, target, content in resolved:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(content, encoding="utf-8")
        touched.append(rel)
    if patchset.hypothesis.strip():
        (root / "HYPOTHESIS.md").write_text(patchset.hypothesis, encoding="utf-8")
        touched.append("HYPOTHESIS.md")
    log.debug("applied patch set %s: %s", patchset.digest[:12], ", ".join(touched))
    return touched
