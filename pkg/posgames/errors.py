"""
Exception hierarchy shared by every posgames module.

The CLI maps these onto exit codes:
  InputError / PreconditionError -> 2
  BudgetExceeded                 -> 3
StrategyError never reaches the CLI; verifiers turn it into a failing leaf.
"""


class InputError(ValueError):
    """Malformed file, structurally broken instance, or unusable argument."""


class PreconditionError(InputError):
    """An operation was called outside its precondition."""


class BudgetExceeded(RuntimeError):
    def __init__(self, what: str, nodes: int) -> None:
        super().__init__(f"{what}: node budget exhausted after {nodes} nodes")
        self.nodes = nodes


class StrategyError(RuntimeError):
    """A composite strategy has no move for a position outside its case analysis."""
