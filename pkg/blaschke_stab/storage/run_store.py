from __future__ import annotations

import sqlite3
from pathlib import Path

import orjson


class RunStore:
    def __init__(self, db_url: str) -> None:
        self.db_path = self._parse_db_url(db_url)
        self._init_db()

    def _parse_db_url(self, db_url: str) -> Path:
        for prefix in ("sqlite:///", "sqlite://"):
            if db_url.startswith(prefix):
                return Path(db_url[len(prefix):])
        raise ValueError(f"Unsupported BSTAB_RUN_DB_URL: {db_url}")

    def _connect(self) -> sqlite3.Connection:
        return sqlite3.connect(self.db_path)

    def _init_db(self) -> None:
        self.db_path.parent.mkdir(parents=True, exist_ok=True)
        with self._connect() as conn:
            conn.execute(
                """
                CREATE TABLE IF NOT EXISTS runs (
                    run_id TEXT PRIMARY KEY,
                    command TEXT NOT NULL,
                    config_json TEXT NOT NULL,
                    created_at TEXT NOT NULL
                )
                """
            )
            conn.execute(
                """
                CREATE TABLE IF NOT EXISTS events (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    run_id TEXT NOT NULL,
                    event_type TEXT NOT NULL,
                    data_json TEXT NOT NULL,
                    created_at TEXT NOT NULL
                )
                """
            )
            conn.commit()

    def create_run(self, run_id: str, command: str, config: dict, created_at: str) -> None:
        with self._connect() as conn:
            conn.execute(
                "INSERT INTO runs (run_id, command, config_json, created_at) VALUES (?, ?, ?, ?)",
                (run_id, command, orjson.dumps(config).decode(), created_at),
            )
            conn.commit()

    def get_run(self, run_id: str) -> dict | None:
        with self._connect() as conn:
            row = conn.execute(
                "SELECT run_id, command, config_json, created_at FROM runs WHERE run_id = ?",
                (run_id,),
            ).fetchone()
        if not row:
            return None
        return {
            "run_id": row[0],
            "command": row[1],
            "config": orjson.loads(row[2]),
            "created_at": row[3],
        }

    def add_event(self, run_id: str, event_type: str, data: dict, created_at: str) -> None:
        with self._connect() as conn:
            conn.execute(
                """
                INSERT INTO events (run_id, event_type, data_json, created_at)
                VALUES (?, ?, ?, ?)
                """,
                (run_id, event_type, orjson.dumps(data).decode(), created_at),
            )
            conn.commit()

    def list_events(self, run_id: str) -> list[dict]:
        with self._connect() as conn:
            rows = conn.execute(
                """
                SELECT event_type, data_json, created_at
                FROM events
                WHERE run_id = ?
                ORDER BY id ASC
                """,
                (run_id,),
            ).fetchall()
        return [
            {"event_type": event_type, "data": orjson.loads(data_json), "timestamp": created_at}
            for event_type, data_json, created_at in rows
        ]
