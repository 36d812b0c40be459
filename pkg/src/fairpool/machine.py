"""Epoch-synchronized demand/claim allocation machine.

Models a contract-style execution environment: integer-only arithmetic
with floored division, block-number-driven epochs, and two
parity-alternating resource pools.  Users register demands against one
pool during an epoch and claim their shares from that same pool during
the next epoch, while the freshly replenished complementary pool collects
the next round of demands.  Dominant shares are stored as floored
reciprocals scaled by a precision factor, so no call ever needs a loop
over the user set and every division is an exact integer floor.

State layout per parity (index 0 or 1):

* ``reserves``            pool of resource units claims drain
* ``scaled_demand_sums``  per-resource sum of demand times reciprocal share
* ``max_recip_ds``        the minimum stored reciprocal, i.e. the largest
                          dominant share among last epoch's demanders

The cycle count is a single scalar recomputed at every epoch transition
for the pool claims are about to drain.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

from .vectors import ResourceVector

DEFAULT_PRECISION = 1_000_000

# All intermediates must stay representable in an unsigned 128-bit word;
# anything wider is treated as a corrupted computation, not wrapped.
INT_LIMIT = 2**128 - 1


class MachineError(Exception):
    """A call violated the machine's guards or preconditions."""


class MachineOverflowError(MachineError):
    """An intermediate value exceeded the 128-bit width contract."""


def _checked(value: int) -> int:
    if value > INT_LIMIT:
        raise MachineOverflowError(
            f"intermediate value {value} exceeds the 128-bit limit"
        )
    return value


def fixed_floor_div(a: int, b: int) -> int:
    """Floored integer division used for every division in the machine."""
    if b == 0:
        raise MachineError("division by zero")
    if a < 0 or b < 0:
        raise MachineError("fixed_floor_div operates on non-negative integers")
    _checked(a)
    _checked(b)
    return a // b


@dataclass(frozen=True)
class MachineConfig:
    """Deployment-time constants of the machine."""

    resource_count: int
    epoch_span: int
    offset: int
    epoch_reserve: ResourceVector
    precision: int = DEFAULT_PRECISION

    def __post_init__(self) -> None:
        if self.resource_count < 1:
            raise ValueError("resource_count must be at least 1")
        if self.epoch_span < 1:
            raise ValueError("epoch_span must be at least 1")
        if len(self.epoch_reserve) != self.resource_count:
            raise ValueError("epoch_reserve length must equal resource_count")
        if self.precision < 1:
            raise ValueError("precision must be positive")


@dataclass(frozen=True)
class ClaimReceipt:
    user: int
    epoch: int
    task_count: int
    share: ResourceVector
    clamped: bool


@dataclass(frozen=True)
class DemandRecord:
    """Echo of an accepted demand.

    ``min_updates`` counts how many times the running reciprocal-share
    minimum was replaced after its first assignment; it is the branch
    count the cost model charges for.
    """

    user: int
    epoch: int
    vector: ResourceVector
    recip_share: int
    min_updates: int


@dataclass
class _UserSlot:
    demand: list[ResourceVector | None] = field(default_factory=lambda: [None, None])
    recip: list[int] = field(default_factory=lambda: [0, 0])
    balance: list[int] = field(default_factory=list)
    last_demand_epoch: int = 0
    last_claim_epoch: int = 0


class AllocationMachine:
    """Serialized single-writer state driven by block-stamped calls."""

    def __init__(self, config: MachineConfig) -> None:
        self._cfg = config
        m = config.resource_count
        # Parity 0 is the demand-target pool of epoch 1.
        self._reserves: list[list[int]] = [list(config.epoch_reserve), [0] * m]
        self._sds: list[list[int]] = [[0] * m, [0] * m]
        self._max_recip: list[int] = [0, 0]
        self._k_prime = 0
        self._epoch = 1
        self._reset_epoch = 0
        self._users: dict[int, _UserSlot] = {}
        self._transitions = 0

    @property
    def config(self) -> MachineConfig:
        return self._cfg

    @property
    def epoch(self) -> int:
        return self._epoch

    @property
    def cycle_count(self) -> int:
        return self._k_prime

    @property
    def transitions(self) -> int:
        """Number of epoch transitions executed so far."""
        return self._transitions

    @property
    def user_ids(self) -> tuple[int, ...]:
        return tuple(self._users)

    def reserve_pool(self, parity: int) -> ResourceVector:
        return ResourceVector(self._reserves[parity])

    def balance_of(self, user: int) -> ResourceVector:
        return ResourceVector(self._slot(user).balance)

    def demand_pool_parity(self) -> int:
        """Pool index demands registered now would be stored against."""
        return (self._epoch + 1) % 2

    def claim_pool_parity(self) -> int:
        """Pool index claims made now would drain."""
        return self._epoch % 2

    def total_injected(self) -> ResourceVector:
        """Deployment reserve plus every replenishment so far."""
        return self._cfg.epoch_reserve.scale(1 + self._transitions)

    def snapshot(self) -> dict:
        """Self-describing state record; stable across identical call sequences."""
        return {
            "epoch": self._epoch,
            "reserves": (tuple(self._reserves[0]), tuple(self._reserves[1])),
            "cycle_count": self._k_prime,
            "balances": {uid: tuple(slot.balance) for uid, slot in self._users.items()},
        }

    def register_user(self, user: int) -> None:
        if user in self._users:
            raise MachineError(f"user {user} is already registered")
        slot = _UserSlot()
        slot.balance = [0] * self._cfg.resource_count
        self._users[user] = slot
        if 2 * len(self._users) > self._cfg.epoch_span:
            warnings.warn(
                f"epoch span {self._cfg.epoch_span} is shorter than two blocks "
                f"per registered user ({len(self._users)} users); some users "
                "may not fit a demand and a claim into one epoch",
                stacklevel=2,
            )

    def update_state(self, block: int) -> bool:
        """Advance the epoch for the given block number.

        On a transition: replenish the pool that will take the new
        epoch's demands, and recompute the cycle count for the pool the
        new epoch's claims will drain.  Returns True iff a transition
        executed; calling again at the same block is a no-op.
        """
        cfg = self._cfg
        if block < cfg.offset:
            raise MachineError(
                f"block {block} precedes the deployment offset {cfg.offset}"
            )
        epoch = (block - cfg.offset) // cfg.epoch_span + 1
        if epoch <= self._epoch:
            return False
        self._epoch = epoch
        self._transitions += 1
        s = epoch % 2
        refill = self._reserves[1 - s]
        for r, er in enumerate(cfg.epoch_reserve):
            refill[r] = _checked(refill[r] + er)
        self._k_prime = self._compute_cycle_count(s)
        return True

    def _compute_cycle_count(self, parity: int) -> int:
        sds = self._sds[parity]
        if all(v == 0 for v in sds):
            return 0
        p = self._cfg.precision
        top = self._max_recip[parity]
        best: int | None = None
        for r, total in enumerate(sds):
            if total == 0:
                # Resource demanded by nobody imposes no bound.
                continue
            numerator = _checked(top * self._reserves[parity][r] * p)
            bound = fixed_floor_div(numerator, total)
            if best is None or bound < best:
                best = bound
        assert best is not None
        return best

    def demand(self, user: int, vector: ResourceVector, block: int) -> DemandRecord:
        """Register a demand vector for the next epoch's claim round."""
        slot = self._slot(user)
        self.update_state(block)
        e = self._epoch
        if slot.last_demand_epoch == e:
            raise MachineError(f"user {user} already demanded in epoch {e}")
        cfg = self._cfg
        if len(vector) != cfg.resource_count:
            raise MachineError(
                f"demand has {len(vector)} components, machine has "
                f"{cfg.resource_count} resources"
            )
        if vector.is_zero():
            raise MachineError("demand must have a positive component")
        s = (e + 1) % 2
        pool = self._reserves[s]
        p = cfg.precision
        recip: int | None = None
        updates = 0
        for r, d in enumerate(vector):
            if d == 0:
                continue
            if pool[r] == 0:
                raise MachineError(
                    f"resource {r} has no reserve in the demand pool"
                )
            candidate = fixed_floor_div(_checked(p * pool[r]), d)
            if recip is None:
                recip = candidate
            elif candidate < recip:
                recip = candidate
                updates += 1
        assert recip is not None
        if recip == 0:
            raise MachineError(
                "demand exceeds the precision-scaled reserve; reciprocal "
                "share would be zero"
            )
        slot.demand[s] = vector
        slot.recip[s] = recip
        scaled = [_checked(d * recip) for d in vector]
        if self._reset_epoch < e:
            # First demand of the epoch overwrites last round's sums.
            self._sds[s] = scaled
            self._max_recip[s] = recip
            self._reset_epoch = e
        else:
            sds = self._sds[s]
            for r, v in enumerate(scaled):
                sds[r] = _checked(sds[r] + v)
            # Minimum reciprocal corresponds to the largest dominant share.
            if recip < self._max_recip[s]:
                self._max_recip[s] = recip
        slot.last_demand_epoch = e
        return DemandRecord(user, e, vector, recip, updates)

    def claim(self, user: int, block: int) -> ClaimReceipt:
        """Pay out the share reserved by the user's previous-epoch demand."""
        slot = self._slot(user)
        self.update_state(block)
        e = self._epoch
        if slot.last_demand_epoch == 0 or slot.last_demand_epoch != e - 1:
            raise MachineError(
                f"user {user} has no demand registered in epoch {e - 1}"
            )
        if slot.last_claim_epoch == e:
            raise MachineError(f"user {user} already claimed in epoch {e}")
        s = e % 2
        p = self._cfg.precision
        ratio = fixed_floor_div(_checked(slot.recip[s] * p), self._max_recip[s])
        task_count = fixed_floor_div(_checked(ratio * self._k_prime), p * p)
        demand_vec = slot.demand[s]
        assert demand_vec is not None
        pool = self._reserves[s]
        share = [_checked(task_count * d) for d in demand_vec]
        clamped = False
        for r in range(len(share)):
            if share[r] > pool[r]:
                share[r] = pool[r]
                clamped = True
        for r in range(len(share)):
            pool[r] -= share[r]
            slot.balance[r] = _checked(slot.balance[r] + share[r])
        slot.last_claim_epoch = e
        return ClaimReceipt(user, e, task_count, ResourceVector(share), clamped)

    def _slot(self, user: int) -> _UserSlot:
        try:
            return self._users[user]
        except KeyError:
            raise MachineError(f"user {user} is not registered") from None


def accounting_gap(machine: AllocationMachine) -> tuple[int, ...]:
    """Per-resource difference between injected units and accounted units.

    Zero everywhere iff the conservation identity holds exactly.
    """
    injected = machine.total_injected()
    held = [0] * machine.config.resource_count
    for parity in (0, 1):
        for r, v in enumerate(machine.reserve_pool(parity)):
            held[r] += v
    for uid in machine.user_ids:
        for r, v in enumerate(machine.balance_of(uid)):
            held[r] += v
    return tuple(i - h for i, h in zip(injected, held))
