"""Trajectories: world states linked by partial maps, each with an agent."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterator, List, Optional

from .colimits import PartialMap, compose_partial, initial_morphism, push_forward
from .schema import ACSet, ACSetMorphism, SchemaError

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class _Node:
    world: ACSet
    agent: ACSetMorphism
    link: Optional[PartialMap]  # from the previous world; None for the first
    prev: Optional["_Node"]
    index: int  # 1-based position


class Trajectory:
    """Persistent sequence of ``(world, agent)`` snapshots.

    Appending returns a new trajectory sharing the prefix, so branching
    interpreters can fork cheaply.  Indices are 1-based.  With ``cap``
    set, only the newest ``cap`` snapshots are retained; looking further
    back fails softly (``postcompose`` returns ``None``).
    """

    __slots__ = ("_head", "cap", "_hash")

    def __init__(self, world: ACSet, agent: Optional[ACSetMorphism] = None,
                 cap: Optional[int] = None):
        if agent is None:
            agent = initial_morphism(world)
        if agent.cod is not world and agent.cod != world:
            raise SchemaError("agent does not land in the world")
        self._head = _Node(world, agent, None, None, 1)
        self.cap = cap
        self._hash = None

    @classmethod
    def _wrap(cls, head: _Node, cap) -> "Trajectory":
        t = cls.__new__(cls)
        t._head, t.cap, t._hash = head, cap, None
        return t

    # accessors -----------------------------------------------------------
    def last(self) -> ACSet:
        return self._head.world

    def length(self) -> int:
        return self._head.index

    def __len__(self):
        return self._head.index

    @property
    def agent(self) -> ACSetMorphism:
        return self._head.agent

    def _node(self, i: int) -> _Node:
        if not 1 <= i <= self._head.index:
            raise IndexError(f"trajectory index {i} out of range 1..{self._head.index}")
        n = self._head
        while n is not None and n.index > i:
            n = n.prev
        if n is None:
            raise IndexError(f"snapshot {i} was trimmed (cap {self.cap})")
        return n

    def get(self, i: int) -> ACSetMorphism:
        return self._node(i).agent

    def world(self, i: int) -> ACSet:
        return self._node(i).world

    def link(self, i: int) -> PartialMap:
        """The partial map ``world(i-1) -> world(i)``."""
        if i < 2:
            raise IndexError("the first snapshot has no incoming map")
        return self._node(i).link

    def snapshots(self) -> List[_Node]:
        out = []
        n = self._head
        while n is not None:
            out.append(n)
            n = n.prev
        return out[::-1]

    def __iter__(self) -> Iterator[tuple]:
        for n in self.snapshots():
            yield n.world, n.agent

    # operations ----------------------------------------------------------
    def postcompose(self, f: ACSetMorphism, i: int) -> Optional[ACSetMorphism]:
        """Push ``f: X -> world(i)`` forward to the last world, if it survives."""
        try:
            node = self._node(i)
        except IndexError:
            if 1 <= i <= self.length():
                log.warning("postcompose below the retained window (index %d)", i)
                return None
            raise
        if f.cod is not node.world and f.cod != node.world:
            raise SchemaError("morphism does not land in the indexed world")
        links = []
        n = self._head
        while n.index > i:
            links.append(n.link)
            n = n.prev
        if not links:
            return f
        pm = links[-1]
        for q in reversed(links[:-1]):
            pm = compose_partial(pm, q)
        return push_forward(f, pm)

    def extend(self, b: ACSetMorphism) -> "Trajectory":
        """Same world, new agent, identity link."""
        w = self._head.world
        if b.cod is not w and b.cod != w:
            raise SchemaError("agent does not land in the last world")
        return self._push(w, b, PartialMap.identity(w))

    def extend_with(self, pm: PartialMap, agent: ACSetMorphism) -> "Trajectory":
        if pm.dom is not self._head.world and pm.dom != self._head.world:
            raise SchemaError("partial map does not start at the last world")
        if agent.cod is not pm.cod and agent.cod != pm.cod:
            raise SchemaError("agent does not land in the new world")
        return self._push(pm.cod, agent, pm)

    def _push(self, world, agent, pm) -> "Trajectory":
        head = _Node(world, agent, pm, self._head, self._head.index + 1)
        if self.cap is not None and head.index > self.cap:
            head = _trim(head, self.cap)
        return Trajectory._wrap(head, self.cap)

    # value semantics ------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        a, b = self._head, other._head
        while a is not None and b is not None:
            if a is b:
                return True
            if (a.index != b.index or a.world != b.world or a.agent != b.agent
                    or a.link != b.link):
                return False
            a, b = a.prev, b.prev
        return a is None and b is None

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._head.index, self._head.world, self._head.agent))
        return self._hash

    def __repr__(self):
        return f"Trajectory(len={self.length()}, last={self.last()!r})"


def _trim(head: _Node, cap: int) -> _Node:
    # rebuild the retained window; the oldest kept node loses its link
    keep = []
    n = head
    while n is not None and len(keep) < cap:
        keep.append(n)
        n = n.prev
    prev = None
    for node in reversed(keep):
        prev = _Node(node.world, node.agent, node.link if prev is not None else None, prev,
                     node.index)
    return prev


def singleton(world: ACSet, agent: Optional[ACSetMorphism] = None) -> Trajectory:
    return Trajectory(world, agent)
