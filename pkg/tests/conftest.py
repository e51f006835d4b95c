import pytest

from plahx.bench.domains import BLOCKS
from plahx.grounding import ground
from plahx.pddl import parse_domain, parse_problem

TWO_BLOCKS = """\
(define (problem two)
  (:domain blocks)
  (:objects b1 b2 - block)
  (:init (ontable b1) (ontable b2) (clear b1) (clear b2) (handempty))
  (:goal (and (on b1 b2))))
"""


@pytest.fixture(scope="session")
def blocks():
    return parse_domain(BLOCKS)


@pytest.fixture(scope="session")
def two_blocks(blocks):
    return parse_problem(TWO_BLOCKS, blocks)


@pytest.fixture(scope="session")
def two_task(blocks, two_blocks):
    return ground(blocks, two_blocks)
