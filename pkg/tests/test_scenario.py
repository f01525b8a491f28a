import json

import pytest

from ruledgeom import ScenarioError, build_spec, load_scenario
from ruledgeom.scenario import bundled_names, parse_scenario, with_step


def _raw(name="helicoid"):
    from importlib import resources
    return json.loads((resources.files("ruledgeom") / "scenarios" / f"{name}.json").read_text())


@pytest.mark.parametrize("name", bundled_names())
def test_bundled_scenarios_parse_and_build(name):
    sc = load_scenario(name)
    spec = build_spec(sc)
    u = sc.grids.u.values()
    spec.metric.check_point(spec.base(u).alpha)


def test_load_from_path(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps(_raw()))
    assert load_scenario(p).name == "helicoid"


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(colour="red"),
    lambda d: d["metric"].update(preset="sphere", k=-1.0),
    lambda d: d["metric"].update(preset="halfspace", k=1.0),
    lambda d: d.update(version=2),
    lambda d: d["grids"]["u"].update(num=0),
    lambda d: d.update(step=0),
    lambda d: d["surface"].update(base={"preset": "spiral"}),
])
def test_invalid_scenarios_are_rejected(mutate):
    d = _raw()
    mutate(d)
    with pytest.raises(ScenarioError):
        parse_scenario(json.dumps(d))


def test_not_json_and_unknown_name():
    with pytest.raises(ScenarioError):
        parse_scenario("{not json")
    with pytest.raises(ScenarioError, match="bundled"):
        load_scenario("no-such-scenario")


def test_with_step():
    sc = load_scenario("helicoid")
    assert with_step(sc, None) is sc
    assert with_step(sc, 0.01).step == 0.01
