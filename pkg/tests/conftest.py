from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from xaip.parser import parse_domain, parse_problem

FIXTURES = Path(__file__).parent / "fixtures"


def load_warehouse():
    """Parsed fixture domain and problem, fresh instances per call."""
    dom = parse_domain((FIXTURES / "warehouse_domain.pddl").read_text())
    prob = parse_problem((FIXTURES / "warehouse_problem.pddl").read_text(), dom)
    return dom, prob
