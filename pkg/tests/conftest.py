import json
import os
import sys
from importlib.resources import files

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")


@pytest.fixture
def aebs_doc():
    return json.loads(files("safeperf").joinpath("data/aebs.json").read_text())


@pytest.fixture
def aebs_scenario(aebs_doc):
    from safeperf.requirements import Scenario

    return Scenario.from_dict(aebs_doc)
