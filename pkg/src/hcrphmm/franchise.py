"""Compact two-level Chinese restaurant franchise (hierarchical CRP) state.

A franchise is a collection of restaurants sharing one root menu.  Each
customer of restaurant ``j`` sits at a table, every table serves a single
dish, and each table is itself a customer of the root process.  Per-customer
table identities are not stored: a restaurant only keeps, per dish, the list
of table occupancy counts.  Removal therefore samples which table loses a
customer, which is distributionally equivalent to tracking identities.

Dishes are non-negative integers.  Two flavours of root process exist:

* atomic root (``base_size=None``): dish labels form an open-ended space and
  the aggregate "unseen dish" event is queried with the ``NEW`` sentinel;
* finite uniform base (``base_size=V``): dishes live in ``{0..V-1}`` and the
  root spreads its concentration mass uniformly over them, so every concrete
  dish always has positive probability and ``NEW`` is not used.

All mutations can record themselves into an :class:`UndoLog`, which restores
the franchise bit-exactly when replayed in reverse.  This is what makes
reject branches of Metropolis-Hastings moves cheap and exact.

A franchise has no internal locking: each instance belongs to one sampling
chain.  Parallelism comes from running independent chains, each with its own
franchises and generator.
"""

from math import lgamma, log

NEW = -1  # sentinel dish: the aggregate "open a new dish" event (atomic root only)


class RemoveFromEmptyError(ValueError):
    """Raised when removing a customer that is not seated; a caller bug."""


class SnapshotFormatError(ValueError):
    """Raised when a franchise snapshot file cannot be parsed."""


class Restaurant:
    """Tables of one restaurant, grouped by dish.

    ``tables[k]`` is the list of occupancy counts of the tables serving dish
    ``k`` (list order is creation order and is part of the exact state).
    """

    __slots__ = ("tables", "total")

    def __init__(self):
        self.tables = {}
        self.total = 0

    def dish_customers(self, k):
        lst = self.tables.get(k)
        return sum(lst) if lst else 0

    def dish_tables(self, k):
        lst = self.tables.get(k)
        return len(lst) if lst else 0

    def num_tables(self):
        return sum(len(lst) for lst in self.tables.values())

    def clone(self):
        r = Restaurant()
        r.tables = {k: lst.copy() for k, lst in self.tables.items()}
        r.total = self.total
        return r

    def equal_state(self, other):
        return self.total == other.total and self.tables == other.tables


class UndoLog:
    """Reversible record of franchise mutations.

    Entries are appended by :meth:`Franchise.add_customer` and
    :meth:`Franchise.remove_customer`; :meth:`undo_all` replays them in
    reverse, restoring every touched franchise field-by-field.
    """

    __slots__ = ("entries",)

    def __init__(self):
        self.entries = []

    def __len__(self):
        return len(self.entries)

    def undo_all(self):
        entries = self.entries
        while entries:
            op, f, j, k, idx = entries.pop()
            if op == "join":  # a customer joined tables[j][k][idx]
                r = f.restaurants[j]
                r.tables[k][idx] -= 1
                r.total -= 1
            elif op == "open":  # a new table was appended to tables[j][k]
                r = f.restaurants[j]
                lst = r.tables[k]
                lst.pop()
                if not lst:
                    del r.tables[k]
                r.total -= 1
                if r.total == 0:
                    del f.restaurants[j]
                m = f.root_tables[k] - 1
                if m:
                    f.root_tables[k] = m
                else:
                    del f.root_tables[k]
                f.root_total -= 1
            elif op == "leave":  # a customer left tables[j][k][idx]
                r = f.restaurants[j]
                r.tables[k][idx] += 1
                r.total += 1
            else:  # "close": table at position idx of tables[j][k] emptied
                r = f.restaurants.get(j)
                if r is None:
                    r = Restaurant()
                    f.restaurants[j] = r
                r.tables.setdefault(k, []).insert(idx, 1)
                r.total += 1
                f.root_tables[k] = f.root_tables.get(k, 0) + 1
                f.root_total += 1


class Franchise:
    """Hierarchical CRP sufficient statistics with exact undo.

    Parameters
    ----------
    alpha : float
        Concentration of every restaurant-level CRP (> 0).
    gamma : float
        Concentration of the root process (> 0).
    base_size : int, optional
        Size of a finite uniform dish space for the root.  ``None`` gives the
        atomic root with the ``NEW`` aggregate event.
    """

    __slots__ = ("alpha", "gamma", "base_size", "restaurants", "root_tables",
                 "root_total")

    def __init__(self, alpha, gamma, base_size=None):
        if alpha <= 0.0 or gamma <= 0.0:
            raise ValueError("concentrations must be positive")
        self.alpha = alpha
        self.gamma = gamma
        self.base_size = base_size
        self.restaurants = {}
        self.root_tables = {}  # dish -> number of tables serving it, all restaurants
        self.root_total = 0

    # ------------------------------------------------------------------
    # queries

    def root_weight(self, k):
        """Unnormalised root mass of dish ``k`` (denominator ``root_total+gamma``)."""
        if self.base_size is not None:
            return self.root_tables.get(k, 0) + self.gamma / self.base_size
        if k == NEW:
            return self.gamma
        m = self.root_tables.get(k, 0)
        # an unseen concrete dish carries the full new-dish mass, not a share
        return m if m else self.gamma

    def prob(self, j, k):
        """Predictive probability that the next customer of ``j`` eats dish ``k``.

        ``j`` may be absent (empty restaurant); with an atomic root, ``k`` may
        be ``NEW`` for the aggregate unseen-dish event.
        """
        r = self.restaurants.get(j)
        if r is None:
            n_j = 0
            n_jk = 0
        else:
            n_j = r.total
            lst = r.tables.get(k)
            n_jk = sum(lst) if lst else 0
        share = self.alpha * self.root_weight(k) / (self.root_total + self.gamma)
        return (n_jk + share) / (n_j + self.alpha)

    def dishes(self):
        """Labels currently served somewhere (root table count >= 1)."""
        return self.root_tables.keys()

    def num_dishes(self):
        return len(self.root_tables)

    def total_customers(self):
        return sum(r.total for r in self.restaurants.values())

    # ------------------------------------------------------------------
    # mutations

    def add_customer(self, j, k, rng, undo=None):
        """Seat one customer eating dish ``k`` in restaurant ``j``.

        The table is chosen among tables already serving ``k`` with
        probability proportional to their occupancy, or a new table is opened
        with weight ``alpha * root_weight(k) / (root_total + gamma)``.
        Returns the log probability of the table choice made.
        """
        r = self.restaurants.get(j)
        if r is None:
            r = Restaurant()
            self.restaurants[j] = r
        lst = r.tables.get(k)
        open_w = self.alpha * self.root_weight(k) / (self.root_total + self.gamma)
        if lst:
            n_jk = sum(lst)
            u = rng.random() * (n_jk + open_w)
            if u < n_jk:
                acc = 0.0
                idx = len(lst) - 1  # guard against float round-off on the scan
                for i, c in enumerate(lst):
                    acc += c
                    if u < acc:
                        idx = i
                        break
                chosen = lst[idx]
                lst[idx] = chosen + 1
                r.total += 1
                if undo is not None:
                    undo.entries.append(("join", self, j, k, idx))
                return log(chosen / (n_jk + open_w))
            log_q = log(open_w / (n_jk + open_w))
        else:
            log_q = 0.0  # no competing table: forced new table
        if lst is None:
            r.tables[k] = [1]
        else:
            lst.append(1)
        r.total += 1
        self.root_tables[k] = self.root_tables.get(k, 0) + 1
        self.root_total += 1
        if undo is not None:
            undo.entries.append(("open", self, j, k, 0))
        return log_q

    def remove_customer(self, j, k, rng, undo=None):
        """Unseat one customer eating ``k`` from ``j``; table sampled by occupancy."""
        r = self.restaurants.get(j)
        lst = r.tables.get(k) if r is not None else None
        if not lst:
            raise RemoveFromEmptyError(
                "no customer eating dish %r in restaurant %r" % (k, j))
        n_jk = sum(lst)
        u = rng.random() * n_jk
        acc = 0.0
        idx = len(lst) - 1
        for i, c in enumerate(lst):
            acc += c
            if u < acc:
                idx = i
                break
        left = lst[idx] - 1
        if left:
            lst[idx] = left
            r.total -= 1
            if undo is not None:
                undo.entries.append(("leave", self, j, k, idx))
        else:
            del lst[idx]
            if not lst:
                del r.tables[k]
            r.total -= 1
            if r.total == 0:
                del self.restaurants[j]
            m = self.root_tables[k] - 1
            if m:
                self.root_tables[k] = m
            else:
                del self.root_tables[k]
            self.root_total -= 1
            if undo is not None:
                undo.entries.append(("close", self, j, k, idx))

    def draw_dish(self, j, rng):
        """Draw (dish, table) jointly from restaurant ``j`` without mutating.

        Returns ``(dish, opened_new_table, joint_log_prob)``; ``dish`` is
        ``NEW`` when an atomic root opens a fresh dish.
        """
        r = self.restaurants.get(j)
        n_j = r.total if r is not None else 0
        denom = n_j + self.alpha
        u = rng.random() * denom
        if r is not None and u < n_j:
            acc = 0.0
            for k, lst in r.tables.items():
                for c in lst:
                    acc += c
                    if u < acc:
                        return k, False, log(c / denom)
        # new table: draw the dish from the root
        root_denom = self.root_total + self.gamma
        v = rng.random() * root_denom
        if v < self.root_total:
            acc = 0.0
            dish = None
            for k, m in self.root_tables.items():
                acc += m
                if v < acc:
                    dish = k
                    break
            weight = self.root_weight(dish)
        elif self.base_size is not None:
            dish = rng.randrange(self.base_size)
            weight = self.root_weight(dish)
        else:
            dish = NEW
            weight = self.gamma
        return dish, True, log(self.alpha / denom) + log(weight / root_denom)

    # ------------------------------------------------------------------
    # exact state probability and consistency

    def seating_log_prob(self):
        """Log probability of the whole seating under the two-level CRP.

        Equals the sum of the incremental log probabilities of any customer
        insertion order that builds this state.
        """
        alpha, gamma = self.alpha, self.gamma
        total = 0.0
        for r in self.restaurants.values():
            m_j = 0
            for lst in r.tables.values():
                m_j += len(lst)
                for c in lst:
                    total += lgamma(c)
            total += lgamma(alpha) - lgamma(alpha + r.total) + m_j * log(alpha)
        total += lgamma(gamma) - lgamma(gamma + self.root_total)
        if self.base_size is None:
            total += self.num_dishes() * log(gamma)
            for m in self.root_tables.values():
                total += lgamma(m)
        else:
            # root collapsed onto the finite uniform base: Polya urn terms
            unit = gamma / self.base_size
            for m in self.root_tables.values():
                total += lgamma(unit + m) - lgamma(unit)
        return total

    def audit(self):
        """Check every structural invariant; raises ``ValueError`` on failure."""
        root = {}
        for j, r in self.restaurants.items():
            if r.total != sum(sum(lst) for lst in r.tables.values()):
                raise ValueError("restaurant %r total mismatch" % (j,))
            if r.total == 0:
                raise ValueError("empty restaurant %r retained" % (j,))
            for k, lst in r.tables.items():
                if not lst or any(c < 1 for c in lst):
                    raise ValueError("restaurant %r dish %r has a bad table" % (j, k))
                root[k] = root.get(k, 0) + len(lst)
        if root != self.root_tables:
            raise ValueError("root table counts inconsistent with restaurants")
        if self.root_total != sum(root.values()):
            raise ValueError("root total inconsistent")
        if self.base_size is not None:
            for k in root:
                if not 0 <= k < self.base_size:
                    raise ValueError("dish %r outside finite base" % (k,))

    def equal_state(self, other):
        """Exact field-by-field equality of the seating state."""
        if (self.alpha, self.gamma, self.base_size,
                self.root_total) != (other.alpha, other.gamma,
                                     other.base_size, other.root_total):
            return False
        if self.root_tables != other.root_tables:
            return False
        if self.restaurants.keys() != other.restaurants.keys():
            return False
        return all(r.equal_state(other.restaurants[j])
                   for j, r in self.restaurants.items())

    def clone(self):
        f = Franchise(self.alpha, self.gamma, self.base_size)
        f.restaurants = {j: r.clone() for j, r in self.restaurants.items()}
        f.root_tables = dict(self.root_tables)
        f.root_total = self.root_total
        return f

    # ------------------------------------------------------------------
    # snapshot I/O: line-oriented text, root counts derived on load

    def dump(self, fp):
        fp.write("franchise 1\n")
        fp.write("alpha %r\n" % self.alpha)
        fp.write("gamma %r\n" % self.gamma)
        fp.write("base %s\n" % ("none" if self.base_size is None else self.base_size))
        for j in sorted(self.restaurants):
            r = self.restaurants[j]
            for k in sorted(r.tables):
                for c in r.tables[k]:
                    fp.write("table %d %d %d\n" % (j, k, c))
        fp.write("end\n")

    @classmethod
    def parse(cls, fp):
        header = fp.readline().split()
        if header[:1] != ["franchise"]:
            raise SnapshotFormatError("missing franchise header")
        fields = {}
        tables = []
        for line in fp:
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "end":
                break
            if parts[0] == "table":
                if len(parts) != 4:
                    raise SnapshotFormatError("bad table line: %r" % line)
                tables.append((int(parts[1]), int(parts[2]), int(parts[3])))
            elif len(parts) == 2:
                fields[parts[0]] = parts[1]
            else:
                raise SnapshotFormatError("bad snapshot line: %r" % line)
        try:
            base = fields.get("base", "none")
            f = cls(float(fields["alpha"]), float(fields["gamma"]),
                    None if base == "none" else int(base))
        except KeyError as exc:
            raise SnapshotFormatError("missing field %s" % exc) from exc
        for j, k, c in tables:
            if c < 1:
                raise SnapshotFormatError("non-positive table count")
            r = f.restaurants.get(j)
            if r is None:
                r = Restaurant()
                f.restaurants[j] = r
            r.tables.setdefault(k, []).append(c)
            r.total += c
            f.root_tables[k] = f.root_tables.get(k, 0) + 1
            f.root_total += 1
        f.audit()
        return f

    def save(self, path):
        with open(path, "w", encoding="ascii") as fp:
            self.dump(fp)

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="ascii") as fp:
            return cls.parse(fp)
