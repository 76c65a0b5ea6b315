import time

import pytest

from fatpoints.campaign import CampaignConfig, run_campaign


@pytest.fixture(scope="session")
def d14_run(tmp_path_factory):
    """Complete d=14 campaign, shared by the acceptance criteria tests.

    Returns the log path, the run summary and the wall time of the sweep.
    """
    out = tmp_path_factory.mktemp("campaign") / "d14.jsonl"
    t0 = time.perf_counter()
    summary = run_campaign(CampaignConfig(degrees=(14, 14), out=out, base_seed=14))
    elapsed = time.perf_counter() - t0
    assert summary["ok"], f"d=14 campaign did not come back clean: {summary}"
    return {"path": out, "summary": summary, "elapsed": elapsed}
