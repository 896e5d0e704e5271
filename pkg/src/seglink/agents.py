"""Deterministic completability agents.

The platformer agent runs a best-first search over (row, col, jump phase,
lateral moves used) with a simple tile-physics jump model.  The roguelike
agent searches over (row, col, stamina, switches, eaten food).  Both take a
padded level and report whether the final padding region is reachable.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass

from .level import COLUMNS, AgentParams, GameConfig, LevelError, SliceSequence, to_grid

GROUNDED = "grounded"
FALLING = "falling"

OPEN, PLATFORM, SOLID, LETHAL = 0, 1, 2, 3


class MalformedLevel(LevelError):
    pass


@dataclass(frozen=True)
class AgentResult:
    completable: bool
    furthest_progress: float
    path: tuple = ()
    nodes_expanded: int = 0
    budget_exhausted: bool = False

    def to_json(self) -> dict:
        return {
            "completable": self.completable,
            "furthest_progress": self.furthest_progress,
            "nodes_expanded": self.nodes_expanded,
            "budget_exhausted": self.budget_exhausted,
            "path": [list(s) for s in self.path],
        }

    def dump_path(self) -> str:
        return json.dumps([list(s) for s in self.path])


def _tile_classes(grid, config: GameConfig) -> bytearray:
    solid = config.tagged("solid")
    platform = config.tagged("passable-platform")
    lethal = config.tagged("hazard") | config.tagged("enemy")
    out = bytearray(len(grid.cells))
    for i, t in enumerate(grid.cells):
        if t in solid:
            out[i] = SOLID
        elif t in lethal:
            out[i] = LETHAL
        elif t in platform:
            out[i] = PLATFORM
    return out


class PlatformerModel:
    """Transition system of the platformer agent on one padded level.

    Phases: 0 grounded, 1..J rising (rows ascended so far), J+1 falling.
    ``lat`` counts lateral moves made while rising and is 0 otherwise.
    """

    def __init__(self, level: SliceSequence, config: GameConfig,
                 params: AgentParams | None = None):
        params = params or config.agent_params
        grid = to_grid(level)
        self.H, self.W = grid.height, grid.width
        self.cls = _tile_classes(grid, config)
        self.J = params.max_jump_height
        self.HM = params.max_jump_horizontal
        self.wrap = params.allow_horizontal_wrap
        self.vertical = level.orientation != COLUMNS
        self.n = len(level)
        self.pad_start = len(config.padding_start)
        self.goal_from = self.n - len(config.padding_end)
        self.FALL = self.J + 1

    def progress_index(self, r: int, c: int) -> int:
        return self.H - 1 - r if self.vertical else c

    def _col(self, c: int):
        if 0 <= c < self.W:
            return c
        if self.wrap:
            return c % self.W
        return None

    def _cls(self, r: int, c: int) -> int:
        return self.cls[r * self.W + c]

    def supported(self, r: int, c: int) -> bool:
        return r + 1 < self.H and self.cls[(r + 1) * self.W + c] in (SOLID, PLATFORM)

    def enterable(self, r: int, c: int) -> bool:
        return self.cls[r * self.W + c] in (OPEN, PLATFORM)

    def starts(self) -> list[tuple]:
        out = []
        for r in range(self.H):
            for c in range(self.W):
                if self.progress_index(r, c) < self.pad_start and \
                        self.enterable(r, c) and self.supported(r, c):
                    out.append((r, c, 0, 0))
        return sorted(out)

    def is_goal(self, r: int, c: int, phase: int = 0) -> bool:
        # the agent must stand in the end padding, not merely pass through it
        return phase == 0 and self.progress_index(r, c) >= self.goal_from

    def successors(self, state: tuple) -> list[tuple]:
        r, c, phase, lat = state
        out = []
        if phase == 0:
            for d in (-1, 1):
                nc = self._col(c + d)
                if nc is not None and self.enterable(r, nc):
                    out.append((r, nc, 0, 0) if self.supported(r, nc) else (r, nc, self.FALL, 0))
            if r > 0:
                for d in (-1, 0, 1):
                    if abs(d) > self.HM:
                        continue
                    nc = self._col(c + d)
                    if nc is not None and self.enterable(r - 1, nc):
                        out.append((r - 1, nc, 1, abs(d)))
        elif phase < self.FALL:
            if phase < self.J and r > 0:
                for d in (-1, 0, 1):
                    if lat + abs(d) > self.HM:
                        continue
                    nc = self._col(c + d)
                    if nc is not None and self.enterable(r - 1, nc):
                        out.append((r - 1, nc, phase + 1, lat + abs(d)))
            out.append((r, c, self.FALL, 0))
        else:
            if self.supported(r, c):
                out.append((r, c, 0, 0))
            elif r + 1 < self.H:
                for d in (-1, 0, 1):
                    nc = self._col(c + d)
                    if nc is not None and self._cls(r + 1, nc) == OPEN:
                        out.append((r + 1, nc, self.FALL, 0))
        return out


def _platformer_search(level: SliceSequence, config: GameConfig,
                       params: AgentParams | None) -> AgentResult:
    """Best-first search over PlatformerModel states.

    States are packed into ints in (row, col, phase, lat) lexicographic order
    so the heap key ``remaining * n_states + state`` breaks ties exactly like
    comparing state tuples.  The transitions mirror PlatformerModel.successors.
    """
    params = params or config.agent_params
    m = PlatformerModel(level, config, params)
    H, W, J, HM, FALL = m.H, m.W, m.J, m.HM, m.FALL
    P, L = J + 2, HM + 1
    NS = H * W * P * L
    last = max(m.n - 1, 1)
    cls = m.cls
    enter = [k in (OPEN, PLATFORM) for k in cls]
    support = [r + 1 < H and cls[(r + 1) * W + c] in (SOLID, PLATFORM)
               for r in range(H) for c in range(W)]
    fall_ok = [k == OPEN for k in cls]
    progress = [m.progress_index(r, c) for r in range(H) for c in range(W)]
    goal_from = m.goal_from
    wrap = m.wrap
    if wrap:
        cols = [[(c + d) % W for d in (-1, 0, 1)] for c in range(W)]
    else:
        cols = [[c + d if 0 <= c + d < W else -1 for d in (-1, 0, 1)] for c in range(W)]

    def pack(r, c, phase, lat):
        return ((r * W + c) * P + phase) * L + lat

    parent: dict = {}
    heap = []
    for st in m.starts():
        code = pack(*st)
        parent[code] = -1
        heap.append((last - progress[st[0] * W + st[1]]) * NS + code)
    heapq.heapify(heap)
    best_idx, best_code = -1, -1
    expanded = 0
    goal = -1
    budget = params.node_budget
    pop, push = heapq.heappop, heapq.heappush
    while heap:
        code = pop(heap) % NS
        expanded += 1
        rest, lat = divmod(code, L)
        pos, phase = divmod(rest, P)
        idx = progress[pos]
        if idx > best_idx:
            best_idx, best_code = idx, code
        if phase == 0 and idx >= goal_from:
            goal = code
            break
        if expanded >= budget:
            break
        r, c = divmod(pos, W)
        out = []
        if phase == 0:
            cl, _, cr = cols[c]
            for nc in (cl, cr):
                if nc >= 0:
                    np_ = r * W + nc
                    if enter[np_]:
                        out.append((np_ * P + (0 if support[np_] else FALL)) * L)
            if r > 0:
                base = (r - 1) * W
                for d, nc in zip((-1, 0, 1), cols[c]):
                    if nc >= 0 and (d == 0 or HM >= 1) and enter[base + nc]:
                        out.append(((base + nc) * P + 1) * L + (d != 0))
        elif phase < FALL:
            if phase < J and r > 0:
                base = (r - 1) * W
                for d, nc in zip((-1, 0, 1), cols[c]):
                    nl = lat + (d != 0)
                    if nc >= 0 and nl <= HM and enter[base + nc]:
                        out.append(((base + nc) * P + phase + 1) * L + nl)
            out.append((pos * P + FALL) * L)
        else:
            if support[pos]:
                out.append(pos * P * L)
            elif r + 1 < H:
                base = (r + 1) * W
                for nc in cols[c]:
                    if nc >= 0 and fall_ok[base + nc]:
                        out.append(((base + nc) * P + FALL) * L)
        for t in out:
            if t not in parent:
                parent[t] = code
                push(heap, (last - progress[t // (P * L)]) * NS + t)
    end = goal if goal >= 0 else best_code
    path = []
    while end >= 0:
        rest, lat = divmod(end, L)
        pos, phase = divmod(rest, P)
        path.append((*divmod(pos, W), phase, lat))
        end = parent[end]
    path.reverse()
    done = goal >= 0
    prog = 1.0 if done else max(best_idx, 0) / last
    return AgentResult(done, prog, tuple(path), expanded,
                       not done and expanded >= budget)


def platformer_check(level: SliceSequence, config: GameConfig,
                     params: AgentParams | None = None) -> AgentResult:
    return _platformer_search(level, config, params)


def vertical_platformer_check(level: SliceSequence, config: GameConfig,
                              params: AgentParams | None = None) -> AgentResult:
    # same automaton; the play axis follows the rows-bottom-to-top orientation
    return _platformer_search(level, config, params)


class RoguelikeModel:
    """Top-down stamina game: 4-way moves, food refills, switches open the portal."""

    def __init__(self, level: SliceSequence, config: GameConfig,
                 params: AgentParams | None = None, initial_stamina: int | None = None):
        params = params or config.agent_params
        grid = to_grid(level)
        self.H, self.W = grid.height, grid.width
        self.vertical = level.orientation != COLUMNS
        self.n = len(level)
        self.pad_start = len(config.padding_start)
        blocked = config.tagged("solid")
        lethal = config.tagged("hazard") | config.tagged("enemy")
        food, switch = config.tagged("food"), config.tagged("switch")
        goal = config.tagged("portal") | config.tagged("end-marker")
        start = config.tagged("start-marker")
        self.open = bytearray(len(grid.cells))
        self.food_bit = {}
        self.switch_bit = {}
        self.goals = set()
        starts = []
        for i, t in enumerate(grid.cells):
            if t in blocked or t in lethal:
                continue
            self.open[i] = 1
            if t in food:
                self.food_bit[i] = 1 << len(self.food_bit)
            if t in switch:
                self.switch_bit[i] = 1 << len(self.switch_bit)
            if t in goal:
                self.goals.add(i)
            if t in start:
                starts.append(i)
        if not self.goals:
            raise MalformedLevel("level has no portal or goal marker")
        if not starts:
            starts = [i for i in range(len(grid.cells))
                      if self.open[i] and i not in self.goals
                      and self.progress_index(i) < max(self.pad_start, 1)]
        self.start_cells = sorted(starts)
        self.all_switches = (1 << len(self.switch_bit)) - 1
        self.stamina0 = initial_stamina if initial_stamina is not None else params.start_stamina
        self.cost = params.move_cost
        self.gain = params.food_gain
        self.cap = params.stamina_cap

    def progress_index(self, i: int) -> int:
        r, c = divmod(i, self.W)
        return self.H - 1 - r if self.vertical else c

    def starts(self) -> list[tuple]:
        out = []
        for i in self.start_cells:
            sw = self.switch_bit.get(i, 0)
            out.append((i, self.stamina0, sw, 0))
        return out

    def successors(self, state: tuple) -> list[tuple]:
        """Successor states; a goal entry is reported with stamina -1 flagged by is_goal."""
        i, stamina, sw, eaten = state
        r, c = divmod(i, self.W)
        out = []
        for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            if not (0 <= nr < self.H and 0 <= nc < self.W):
                continue
            j = nr * self.W + nc
            if not self.open[j]:
                continue
            st = stamina - self.cost
            if j in self.goals:
                if sw == self.all_switches and st >= 0:
                    out.append((j, st, sw, eaten))
                continue
            bit = self.food_bit.get(j, 0)
            ne = eaten
            if bit and not eaten & bit:
                st = min(st + self.gain, self.cap)
                ne = eaten | bit
            if st <= 0:
                continue
            out.append((j, st, sw | self.switch_bit.get(j, 0), ne))
        return out

    def is_goal(self, state: tuple) -> bool:
        return state[0] in self.goals


def _refill_bound(m: RoguelikeModel, nbrs, food, swb, is_goal, prog) -> tuple[bool, int]:
    """Search a relaxed game where food is never used up.

    Every real play is also a relaxed play, so a relaxed failure proves the
    level is not completable. The relaxed state is (cell, switches) and more
    stamina is always better, so one best stamina per state is exact.
    """
    cost, gain, cap, all_sw = m.cost, m.gain, m.cap, m.all_switches
    best: dict = {}
    stack = []
    for i, st, sw, _ in m.starts():
        if best.get((i, sw), -1) < st:
            best[(i, sw)] = st
            stack.append((i, sw, st))
    far = -1
    while stack:
        i, sw, st = stack.pop()
        if best[(i, sw)] > st:
            continue
        far = max(far, prog[i])
        for j in nbrs[i]:
            t = st - cost
            if is_goal[j]:
                if sw == all_sw and t >= 0:
                    return True, prog[j]
                continue
            if food[j]:
                t = min(t + gain, cap)
            if t <= 0:
                continue
            key = (j, sw | swb[j])
            if best.get(key, -1) < t:
                best[key] = t
                stack.append((j, key[1], t))
    return False, far


def _greedy_witness(m: RoguelikeModel, nbrs, food, swb, is_goal) -> bool:
    """Search keeping the highest-stamina state per (cell, switches, food count).

    This may discard a state that needed its uneaten food, so a miss proves
    nothing. Every state kept is a real play, so reaching the goal does.
    """
    cost, gain, cap, all_sw = m.cost, m.gain, m.cap, m.all_switches
    best: dict = {}
    stack = []
    for i, st, sw, eaten in m.starts():
        key = (i, sw, 0)
        if best.get(key, -1) < st:
            best[key] = st
            stack.append((i, sw, st, eaten, 0))
    while stack:
        i, sw, st, eaten, n = stack.pop()
        if best[(i, sw, n)] > st:
            continue
        for j in nbrs[i]:
            t = st - cost
            if is_goal[j]:
                if sw == all_sw and t >= 0:
                    return True
                continue
            ne, nn = eaten, n
            bit = food[j]
            if bit and not eaten & bit:
                t = min(t + gain, cap)
                ne, nn = eaten | bit, n + 1
            if t <= 0:
                continue
            key = (j, sw | swb[j], nn)
            if best.get(key, -1) < t:
                best[key] = t
                stack.append((j, key[1], t, ne, nn))
    return False


def roguelike_check(level: SliceSequence, config: GameConfig,
                    initial_stamina: int | None = None,
                    params: AgentParams | None = None,
                    quick: bool = False) -> AgentResult:
    """Exact stamina search with food tracked per state.

    With ``quick`` set, two cheap pre-passes may settle the level first; the
    completable flag is unchanged, but no path is returned and a failure's
    furthest_progress is then an upper bound.
    """
    params = params or config.agent_params
    m = RoguelikeModel(level, config, params, initial_stamina)
    last = max(m.n - 1, 1)
    # flat per-cell tables; transitions mirror RoguelikeModel.successors
    W, H = m.W, m.H
    ncell = W * H
    prog = [m.progress_index(i) for i in range(ncell)]
    food = [m.food_bit.get(i, 0) for i in range(ncell)]
    swb = [m.switch_bit.get(i, 0) for i in range(ncell)]
    is_goal = [i in m.goals for i in range(ncell)]
    nbrs = []
    for i in range(ncell):
        r, c = divmod(i, W)
        nbrs.append([nr * W + nc for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1))
                     if 0 <= nr < H and 0 <= nc < W and m.open[nr * W + nc]])
    if quick:
        if _greedy_witness(m, nbrs, food, swb, is_goal):
            return AgentResult(True, 1.0)
        ok, far = _refill_bound(m, nbrs, food, swb, is_goal, prog)
        if not ok:
            return AgentResult(False, max(far, 0) / last)
    cost, gain, cap, all_sw = m.cost, m.gain, m.cap, m.all_switches
    budget = params.node_budget
    fronts: dict = {}
    parent: dict = {}
    heap = []
    for s in m.starts():
        parent[s] = None
        fronts.setdefault((s[0], s[2]), []).append((s[1], s[3]))
        heapq.heappush(heap, (last - prog[s[0]], -s[1], s))
    best_idx, best_state = -1, None
    expanded = 0
    goal = None
    push, pop = heapq.heappush, heapq.heappop
    while heap:
        _, _, s = pop(heap)
        i, stamina, sw, eaten = s
        if is_goal[i]:
            goal = s
            break
        if (stamina, eaten) not in fronts[(i, sw)]:
            continue  # superseded by a dominating state after it was queued
        expanded += 1
        if prog[i] > best_idx:
            best_idx, best_state = prog[i], s
        if expanded >= budget:
            break
        base = stamina - cost
        for j in nbrs[i]:
            st = base
            if is_goal[j]:
                if sw != all_sw or st < 0:
                    continue
                ne, nsw = eaten, sw
            else:
                ne = eaten
                bit = food[j]
                if bit and not eaten & bit:
                    st = min(st + gain, cap)
                    ne = eaten | bit
                if st <= 0:
                    continue
                nsw = sw | swb[j]
            key = (j, nsw)
            fr = fronts.get(key)
            if fr is None:
                fronts[key] = [(st, ne)]
            else:
                if any(fs >= st and not fe & ~ne for fs, fe in fr):
                    continue
                fr[:] = [(fs, fe) for fs, fe in fr if not (st >= fs and not ne & ~fe)]
                fr.append((st, ne))
            t = (j, st, nsw, ne)
            parent[t] = s
            push(heap, (last - prog[j], -st, t))
    end = goal if goal is not None else best_state
    path = []
    while end is not None:
        i, st, sw, _ = end
        path.append((*divmod(i, m.W), st, sw))
        end = parent[end]
    path.reverse()
    progress = 1.0 if goal is not None else max(best_idx, 0) / last
    return AgentResult(goal is not None, progress, tuple(path), expanded,
                       goal is None and expanded >= params.node_budget)


def check(level: SliceSequence, config: GameConfig,
          params: AgentParams | None = None, quick: bool = False) -> AgentResult:
    """Run whichever agent the game config asks for.

    ``quick`` lets an agent skip work that only affects furthest_progress and
    the witness path of uncompletable levels.
    """
    params = params or config.agent_params
    if params.kind == "roguelike":
        return roguelike_check(level, config, params=params, quick=quick)
    if level.orientation == COLUMNS:
        return platformer_check(level, config, params)
    return vertical_platformer_check(level, config, params)


def quick_check(level: SliceSequence, config: GameConfig,
                params: AgentParams | None = None) -> AgentResult:
    """check() for callers that only read the completable flag."""
    return check(level, config, params, quick=True)
