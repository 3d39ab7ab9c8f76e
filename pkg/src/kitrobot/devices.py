"""Device backend protocol shared by the interpreters and the world."""

from __future__ import annotations

from typing import Protocol


class DeviceFault(Exception):
    """A call reached a device the backend does not bind for this agent."""

    def __init__(self, agent: str, obj: str, method: str, args: tuple = ()):
        self.agent = agent
        self.object = obj
        self.method = method
        self.call_args = tuple(args)  # .args is taken by BaseException
        super().__init__(f"agent {agent}: no device binding for {obj}.{method}")


class DeviceBackend(Protocol):
    """What an interpreter needs from its environment.

    apply_action mutates backend state; read_sensor must not (condition
    evaluation is pure by contract). Arguments arrive fully evaluated.
    """

    def apply_action(self, agent: str, obj: str, method: str, args: tuple[int | bool, ...]) -> None:
        ...

    def read_sensor(self, agent: str, obj: str, method: str, args: tuple[int | bool, ...]) -> int | bool:
        ...
