"""
Shared Memory Module: Atomic read/write registers of the simulated system

Every register the consensus protocol and its two building blocks can
touch is preallocated when the file is created. Files are immutable: a
write returns a new file, so any state can be forked cheaply by the
explorer.
"""

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Any, Dict, Iterable, Iterator, List, NamedTuple, Optional, Tuple, Union

from ..utils.errors import ConfigurationError, InternalFault


class _Bottom:
    """The default register value ⊥, ordered above every integer."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __lt__(self, other) -> bool:
        return False

    def __le__(self, other) -> bool:
        return other is self

    def __gt__(self, other) -> bool:
        return other is not self

    def __ge__(self, other) -> bool:
        return True

    def __eq__(self, other) -> bool:
        return other is self

    def __hash__(self) -> int:
        return 0x0B07

    def __repr__(self) -> str:
        return "⊥"

    def __reduce__(self):
        return "BOT"

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self


BOT = _Bottom()

Value = Union[int, _Bottom]


def is_bot(value: Any) -> bool:
    """Return True if value is ⊥."""
    return value is BOT


def value_min(values: Iterable[Value]) -> Value:
    """
    Minimum under the register value order (⊥ greater than every integer).

    Args:
        values: A nonempty collection of values

    Returns:
        The smallest integer present, or ⊥ if every value is ⊥
    """
    values = list(values)
    if not values:
        raise InternalFault("min over an empty collection of values")
    return min(values)


def encode_value(value: Any) -> Any:
    """Render a register value as JSON ("bot" for ⊥)."""
    if value is BOT:
        return "bot"
    if hasattr(value, "to_json"):
        return value.to_json()
    return value


class RegObject(Enum):
    """Shared objects whose registers live in the register file."""

    INPUT = "INPUT"
    DEC = "DEC"
    AC_A = "AC.A"
    AC_B = "AC.B"
    ARM = "ARM"


# Cell offsets inside one tournament node
FLAG0 = 0
FLAG1 = 1
TURN = 2


class RegisterId(NamedTuple):
    """Name of one register: the owning object plus an index path."""

    obj: RegObject
    index: Tuple[int, ...] = ()

    def __str__(self) -> str:
        if self.obj is RegObject.DEC:
            return "DEC"
        return self.obj.value + "".join(f"[{i}]" for i in self.index)


def input_reg(i: int) -> RegisterId:
    """INPUT[i], 1-based."""
    return RegisterId(RegObject.INPUT, (i,))


DEC_REG = RegisterId(RegObject.DEC)


def ac_a_reg(i: int) -> RegisterId:
    """AC.A[i], 1-based."""
    return RegisterId(RegObject.AC_A, (i,))


def ac_b_reg(i: int) -> RegisterId:
    """AC.B[i], 1-based."""
    return RegisterId(RegObject.AC_B, (i,))


def arm_reg(level: int, node: int, cell: int) -> RegisterId:
    """ARM[level][node][cell], all 0-based."""
    return RegisterId(RegObject.ARM, (level, node, cell))


def arm_levels(n: int) -> int:
    """Height of the tournament tree for n contenders (0 when n = 1)."""
    return (n - 1).bit_length()


def arm_nodes(n: int, level: int) -> int:
    """Number of two-process locks at a tournament level."""
    width = 1 << (level + 1)
    return (n + width - 1) // width


class Access(NamedTuple):
    """One step's effect on shared memory: a read, a write, or nothing."""

    op: str
    reg: Optional[RegisterId] = None
    value: Any = None

    @property
    def is_shared(self) -> bool:
        return self.op in ("read", "write")


LOCAL = Access("local")


class RegisterLayout:
    """
    Register namespace and ownership table for a system of n processes.

    Owners are process ids for single-writer registers and None for
    registers any process may write.
    """

    def __init__(self, n: int):
        self.n = n
        ids: List[RegisterId] = []
        owners: List[Optional[int]] = []

        for i in range(1, n + 1):
            ids.append(input_reg(i))
            owners.append(i)
        ids.append(DEC_REG)
        owners.append(None)
        for i in range(1, n + 1):
            ids.append(ac_a_reg(i))
            owners.append(i)
        for i in range(1, n + 1):
            ids.append(ac_b_reg(i))
            owners.append(i)
        for level in range(arm_levels(n)):
            for node in range(arm_nodes(n, level)):
                for cell in (FLAG0, FLAG1, TURN):
                    ids.append(arm_reg(level, node, cell))
                    leaf_pid = 2 * node + cell + 1
                    if level == 0 and cell != TURN and leaf_pid <= n:
                        owners.append(leaf_pid)
                    else:
                        owners.append(None)

        self.ids: Tuple[RegisterId, ...] = tuple(ids)
        self.owners: Tuple[Optional[int], ...] = tuple(owners)
        self.slots: Dict[RegisterId, int] = {rid: slot for slot, rid in enumerate(ids)}

    @staticmethod
    @lru_cache(maxsize=None)
    def for_size(n: int) -> "RegisterLayout":
        """Shared layout instance for n processes."""
        return RegisterLayout(n)

    def slot(self, reg: RegisterId) -> int:
        try:
            return self.slots[reg]
        except KeyError:
            raise InternalFault(f"unknown register {reg} for n={self.n}") from None


@dataclass(frozen=True)
class RegisterFile:
    """
    All shared atomic registers of one system state.

    Attributes:
        n: Number of processes
        k: Constrained-failure bound the file was sized for
        cells: Register contents, in layout order
    """

    n: int
    k: int
    cells: Tuple[Any, ...]
    layout: RegisterLayout = field(compare=False, repr=False)

    def read(self, reg: RegisterId) -> Any:
        """
        Read one register.

        Args:
            reg: Register to read

        Returns:
            The register's current value

        Raises:
            InternalFault: if the register does not exist
        """
        return self.cells[self.layout.slot(reg)]

    def write(self, reg: RegisterId, value: Any, writer: int) -> "RegisterFile":
        """
        Write one register.

        Args:
            reg: Register to write
            value: New contents
            writer: Id of the writing process

        Returns:
            A new register file holding the write

        Raises:
            InternalFault: on an unknown register, an invalid writer, or a
                write to a single-writer register by another process
        """
        slot = self.layout.slot(reg)
        if not 1 <= writer <= self.n:
            raise InternalFault(f"invalid writer p{writer} for {reg}")
        owner = self.layout.owners[slot]
        if owner is not None and owner != writer:
            raise InternalFault(f"SWMR violation: p{writer} wrote {reg} owned by p{owner}")
        cells = self.cells[:slot] + (value,) + self.cells[slot + 1:]
        return RegisterFile(self.n, self.k, cells, self.layout)

    def owner(self, reg: RegisterId) -> Optional[int]:
        """Single writer of a register, or None for multi-writer registers."""
        return self.layout.owners[self.layout.slot(reg)]

    def ownership(self) -> Dict[RegisterId, Optional[int]]:
        """Full ownership table."""
        return dict(zip(self.layout.ids, self.layout.owners))

    def items(self) -> Iterator[Tuple[RegisterId, Any]]:
        return zip(self.layout.ids, self.cells)

    def snapshot(self) -> Dict[str, Any]:
        """Register contents keyed by rendered register name."""
        return {str(reg): encode_value(value) for reg, value in self.items()}

    def canonical_hash(self) -> str:
        """
        Digest of the file's contents.

        Equal files give equal digests; the encoding walks registers in
        layout order, so it does not depend on any map iteration order.
        """
        document = json.dumps(
            [self.n, self.k, [[str(reg), encode_value(value)] for reg, value in self.items()]],
            separators=(",", ":"),
        )
        return hashlib.blake2b(document.encode("utf-8"), digest_size=16).hexdigest()


def new_register_file(n: int, k: int) -> RegisterFile:
    """
    Create the register file of a fresh system, every cell holding ⊥.

    Args:
        n: Number of processes (at least 1)
        k: Constrained-failure bound (0 <= k <= n)

    Raises:
        ConfigurationError: on an invalid (n, k)
    """
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ConfigurationError("n", f"process count must be an integer >= 1, got {n!r}")
    if isinstance(k, bool) or not isinstance(k, int) or not 0 <= k <= n:
        raise ConfigurationError("k", f"failure bound must satisfy 0 <= k <= n={n}, got {k!r}")
    layout = RegisterLayout.for_size(n)
    return RegisterFile(n, k, (BOT,) * len(layout.ids), layout)
