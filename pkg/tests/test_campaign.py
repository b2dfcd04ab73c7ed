import json

import pytest

from qmiddle.campaign import (DEFAULT_TOLERANCES, CampaignConfig, in_convergent_regime, run_campaign,
                              run_identity_campaign, run_transform_campaign, run_weyl_campaign)
from qmiddle.errors import InvalidInputError


def test_config_validation():
    with pytest.raises(InvalidInputError):
        CampaignConfig(trials=0)
    with pytest.raises(InvalidInputError):
        CampaignConfig(tolerances={"identity.det_B": 0.0})
    with pytest.raises(InvalidInputError):
        CampaignConfig(tolerances={"no.such.check": 1.0})
    with pytest.raises(InvalidInputError):
        CampaignConfig(q_range=(0.5, 1.2))
    with pytest.raises(InvalidInputError):
        run_campaign("nope", CampaignConfig(trials=1))


def test_identity_report_is_deterministic_and_explicit():
    a = run_identity_campaign(CampaignConfig(trials=5, seed=3)).to_json()
    b = run_identity_campaign(CampaignConfig(trials=5, seed=3)).to_json()
    assert json.dumps(a) == json.dumps(b)
    assert a["passed"]
    for check in a["checks"]:
        assert check["tolerance"] == DEFAULT_TOLERANCES[check["name"]]
        assert check["worstCase"]["params"] is not None
    assert "runtimeSeconds" not in a


def test_seed_changes_report():
    a = run_weyl_campaign(CampaignConfig(trials=3, seed=1)).to_json()
    b = run_weyl_campaign(CampaignConfig(trials=3, seed=2)).to_json()
    assert a != b


def test_tolerance_override_is_reported():
    rep = run_weyl_campaign(CampaignConfig(trials=2, tolerances={"weyl.relations": 1e-20}))
    assert rep.check("weyl.relations").tolerance == 1e-20
    assert not rep.check("weyl.relations").passed
    assert "weyl.relations" in rep.failures()


def test_workers_do_not_change_the_report():
    one = run_weyl_campaign(CampaignConfig(trials=4, seed=5)).to_json()
    two = run_weyl_campaign(CampaignConfig(trials=4, seed=5, workers=2)).to_json()
    assert one == two


def test_transform_report_fields():
    rep = run_transform_campaign(CampaignConfig(trials=2, seed=4))
    data = rep.to_json(include_runtime=True)
    assert data["runtimeSeconds"] > 0
    names = {c["name"] for c in data["checks"]}
    assert names == {f"transform.{k}" for k in ("convolution", "mc_vector", "mc_rows", "scalar", "kny", "heun")}
    for c in data["checks"]:
        assert "maxTailMass" in c and "decayFraction" in c
    conv = rep.check("transform.convolution")
    assert conv.flagged == 1 and conv.trials == 2


def test_regime_predicate():
    assert in_convergent_regime(0.9, 0.5)
    assert not in_convergent_regime(1.2 / 0.5, 0.5)
