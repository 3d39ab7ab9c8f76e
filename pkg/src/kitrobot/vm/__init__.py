"""Interpreters for the robot low-level language.

machine.py holds the production frame machine; reference.py a deliberately
simple generator-based evaluator used as its oracle. Both expose the same
stepping surface (step_tick / done / failed / finished_tick / trace) and
must produce identical traces.
"""

from kitrobot.vm.machine import Machine, ProgramCheckError, load_program, run
from kitrobot.vm.reference import ReferenceMachine

__all__ = ["Machine", "ProgramCheckError", "ReferenceMachine", "load_program", "run"]
