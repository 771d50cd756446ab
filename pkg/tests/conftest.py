import pytest


@pytest.fixture(autouse=True)
def isolated_env(tmp_path, monkeypatch):
    monkeypatch.setenv("BSTAB_RUN_DB_URL", f"sqlite:///{tmp_path / 'ledger.db'}")
    monkeypatch.setenv("BSTAB_OUTPUT_DIR", str(tmp_path / "runs"))
    for name in ("BSTAB_SEED", "BSTAB_BRUTE_LIMIT", "BSTAB_SCAN_NMAX", "BSTAB_PACKS_DIR", "BSTAB_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    return tmp_path
