# SPDX-License-Identifier: Apache-2.0
import os
from pathlib import Path

import pytest


@pytest.fixture(scope="session")
def fixtures():
    root = os.environ.get("SSV_SOURCE_DIR", Path(__file__).resolve().parents[2])
    return Path(root) / "fixtures"
