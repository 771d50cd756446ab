from __future__ import annotations

from datetime import datetime, timezone
from uuid import uuid4

from blaschke_stab.storage.run_store import RunStore

SCENARIO_BUILT = "SCENARIO_BUILT"
SCAN_RECORD = "SCAN_RECORD"
BUDGET_DOWNGRADE = "BUDGET_DOWNGRADE"
SANDWICH_ROW = "SANDWICH_ROW"
ROW_FLAGGED = "ROW_FLAGGED"
INVARIANT_CHECK = "INVARIANT_CHECK"
OUTPUT_WRITTEN = "OUTPUT_WRITTEN"


class RunLedger:
    """Append-only event log per run.

    The store keeps timestamps; the in-memory timeline does not, so it can be
    embedded in output files without breaking byte-identical reruns.
    """

    def __init__(self, store: RunStore) -> None:
        self.store = store
        self._timeline: dict[str, list[dict]] = {}

    def start(self, command: str, config: dict) -> str:
        run_id = str(uuid4())
        self.store.create_run(run_id, command, config, _now())
        self._timeline[run_id] = []
        return run_id

    def append(self, run_id: str, event_type: str, data: dict) -> dict:
        timestamp = _now()
        self.store.add_event(run_id, event_type, data, timestamp)
        self._timeline.setdefault(run_id, []).append({"event_type": event_type, "data": data})
        return {"event_type": event_type, "data": data, "timestamp": timestamp}

    def timeline(self, run_id: str) -> list[dict]:
        return list(self._timeline.get(run_id, []))

    def list_events(self, run_id: str) -> list[dict]:
        return self.store.list_events(run_id)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()
