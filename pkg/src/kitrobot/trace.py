"""Execution trace records and their JSON-Lines serialization.

The serialized field order is fixed (tick, agent, kind, object, method,
args, value) and absent fields are omitted; golden files compare byte
for byte against this rendering.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

KIND_ACTION = "action"
KIND_ACTION_ABORTED = "action-aborted"
KIND_COND_EVAL = "cond-eval"
KIND_WAIT_START = "wait-start"
KIND_WAIT_END = "wait-end"
KIND_BRANCH_START = "branch-start"
KIND_BRANCH_END = "branch-end"
KIND_BRANCH_ABORTED = "branch-aborted"
KIND_PROGRAM_END = "program-end"

STATUS_COMPLETED = "completed"
STATUS_BUDGET = "tick-budget-exhausted"
STATUS_FAILED = "failed"


@dataclass(frozen=True)
class TraceRecord:
    tick: int
    agent: str
    kind: str
    object: str | None = None
    method: str | None = None
    args: tuple[int | bool, ...] | None = None
    value: int | bool | str | None = None

    def to_obj(self) -> dict:
        obj: dict = {"tick": self.tick, "agent": self.agent, "kind": self.kind}
        if self.object is not None:
            obj["object"] = self.object
        if self.method is not None:
            obj["method"] = self.method
        if self.args is not None:
            obj["args"] = list(self.args)
        if self.value is not None:
            obj["value"] = self.value
        return obj

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), separators=(",", ":"))


def to_jsonl(records: list[TraceRecord]) -> str:
    return "".join(r.to_json() + "\n" for r in records)
