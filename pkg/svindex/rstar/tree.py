import logging
import math
from dataclasses import dataclass
from typing import Iterator, List, NamedTuple, Optional, Tuple

from svindex.core.exceptions import BuildError, ConfigError
from svindex.core.rect import Rect
from svindex.pagestore.ledger import AccessLedger, PageCategory
from svindex.pagestore.record_file import RecordFile
from svindex.rstar.node import (CHILD_ENTRY_SIZE, NODE_HEADER_SIZE, ChildEntry, LeafEntry, RTreeNode,
                                leaf_entry_size)
from svindex.rstar.split import choose_subtree, split_entries

logger = logging.getLogger(__name__)

MIN_FILL_RATIO = 0.4


@dataclass(frozen=True)
class RTreeParams:
    """
    R*-tree shape parameters.

    Attributes:
    fan_out (int): maximum entries per node.
    min_fill (int): minimum entries per non-root node; defaults to 40% of fan_out.
    """

    fan_out: int = 85
    min_fill: Optional[int] = None

    def __post_init__(self):
        if self.fan_out < 2:
            raise ConfigError(f"RTreeParams: fan_out must be >= 2, got {self.fan_out}")
        if self.min_fill is None:
            object.__setattr__(self, "min_fill", max(1, math.floor(MIN_FILL_RATIO * self.fan_out)))
        if not 1 <= self.min_fill <= (self.fan_out + 1) // 2:
            raise ConfigError(
                f"RTreeParams: min_fill must be in [1, {(self.fan_out + 1) // 2}], got {self.min_fill}")

    def check_page_size(self, page_size: int, augmented: bool):
        """Raises ConfigError when a full node does not fit one page."""
        widest = max(leaf_entry_size(augmented), CHILD_ENTRY_SIZE)
        needed = NODE_HEADER_SIZE + self.fan_out * widest
        if needed > page_size:
            raise ConfigError(
                f"RTreeParams: fan_out {self.fan_out} needs {needed} bytes per node, page size is {page_size}")


class RangeResult(NamedTuple):
    entries: List[LeafEntry]
    visited_leaf_count: int
    visited_pages: List[int]


class LeafSelection(NamedTuple):
    leaf_pages: List[int]
    visited_pages: List[int]


class RStarTree:
    """
    A disk-resident R*-tree over 2-d points, one node per page of a node file.

    Several trees may share one node file; each allocates its own pages. The
    decoded nodes are kept in memory and every node visit during a query is
    charged to the caller's ledger as one page read.
    """

    def __init__(self, node_file: RecordFile, params: Optional[RTreeParams] = None,
                 augmented: bool = False, root_page: Optional[int] = None, height: int = 1):
        """
        Parameters:
        node_file (RecordFile): file holding this tree's node pages.
        params (RTreeParams): fan_out and min_fill.
        augmented (bool): leaf entries carry visual record pointers.
        root_page (int): reopen an existing tree rooted at this page; None creates an empty tree.
        height (int): tree height when reopening.
        """
        self.params = params if params is not None else RTreeParams()
        self.params.check_page_size(node_file.page_size, augmented)
        self.node_file = node_file
        self.augmented = augmented
        self._nodes = {}
        self._splits = 0
        if root_page is None:
            root = RTreeNode(node_file.allocate_page(), is_leaf=True)
            self._nodes[root.page_id] = root
            self._root = root.page_id
            self._height = 1
        else:
            self._root = root_page
            self._height = height
            self._decode_subtree(root_page)

    def _decode_subtree(self, page_id: int):
        node = RTreeNode.decode(page_id, self.node_file.read_page(page_id))
        self._nodes[page_id] = node
        if not node.is_leaf:
            for entry in node.entries:
                self._decode_subtree(entry.child)

    @property
    def root_page(self) -> int:
        return self._root

    @property
    def height(self) -> int:
        return self._height

    @property
    def root_mbr(self) -> Optional[Rect]:
        return self._nodes[self._root].mbr

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    @property
    def node_pages(self) -> List[int]:
        return sorted(self._nodes)

    @property
    def leaf_count(self) -> int:
        return sum(1 for node in self._nodes.values() if node.is_leaf)

    def __len__(self) -> int:
        return sum(len(node.entries) for node in self._nodes.values() if node.is_leaf)

    def node(self, page_id: int) -> RTreeNode:
        return self._nodes[page_id]

    def _load(self, page_id: int, ledger: Optional[AccessLedger]) -> RTreeNode:
        if ledger is not None:
            self.node_file.read_page(page_id, ledger, PageCategory.RTREE)
        return self._nodes[page_id]

    ####################################################################
    #Insertion
    ####################################################################

    def insert(self, entry: LeafEntry):
        """
        Inserts a leaf entry; overflowing nodes split upward to the root.

        Parameters:
        entry (LeafEntry): entry to insert; augmented trees need its visual pointer.
        """
        if self.augmented and entry.visual_ptr is None:
            raise BuildError(f"RStarTree: augmented tree needs a visual pointer for ordinal {entry.ordinal}")

        path = self._choose_path(entry.rect)
        self._nodes[path[-1]].entries.append(entry)

        sibling = None
        for depth in range(len(path) - 1, -1, -1):
            node = self._nodes[path[depth]]
            if depth < len(path) - 1:
                self._refresh_child(node, path[depth + 1])
                if sibling is not None:
                    node.entries.append(ChildEntry(sibling.mbr, sibling.page_id))
                    sibling = None
            if len(node.entries) > self.params.fan_out:
                sibling = self._split(node)
            else:
                node.recompute_mbr()

        if sibling is not None:
            old_root = self._nodes[self._root]
            root = RTreeNode(self.node_file.allocate_page(), is_leaf=False,
                             entries=[ChildEntry(old_root.mbr, old_root.page_id),
                                      ChildEntry(sibling.mbr, sibling.page_id)])
            self._nodes[root.page_id] = root
            self._root = root.page_id
            self._height += 1

    def _choose_path(self, rect: Rect) -> List[int]:
        path = [self._root]
        node = self._nodes[self._root]
        level = self._height - 1
        while not node.is_leaf:
            index = choose_subtree(node.entries, rect, children_are_leaves=(level == 1))
            child = node.entries[index].child
            path.append(child)
            node = self._nodes[child]
            level -= 1
        return path

    def _refresh_child(self, node: RTreeNode, child_page: int):
        child = self._nodes[child_page]
        for entry in node.entries:
            if entry.child == child_page:
                entry.rect = child.mbr
                return
        raise BuildError(f"RStarTree: page {child_page} is not a child of page {node.page_id}")

    def _split(self, node: RTreeNode) -> RTreeNode:
        first, second = split_entries(node.entries, self.params.min_fill)
        node.entries = first
        node.recompute_mbr()
        sibling = RTreeNode(self.node_file.allocate_page(), node.is_leaf, second)
        self._nodes[sibling.page_id] = sibling
        self._splits += 1
        return sibling

    def flush(self):
        """Writes every node to its page; call once the build is complete."""
        for page_id, node in self._nodes.items():
            self.node_file.write_page(page_id, node.encode(self.augmented))
        logger.debug("flushed R*-tree: %d nodes, height %d, %d splits",
                     len(self._nodes), self._height, self._splits)

    ####################################################################
    #Search
    ####################################################################

    def range_query(self, rect: Rect, ledger: Optional[AccessLedger] = None) -> RangeResult:
        """
        Returns the leaf entries whose points lie in rect.

        Every visited node costs one page. Subtrees whose MBR is disjoint from
        rect are never visited; the root is always read.

        Parameters:
        rect (Rect): spatial range, inclusive.
        ledger (AccessLedger): per-query ledger.

        Returns:
        RangeResult: (matching entries, visited leaf count, visited node pages).
        """
        entries: List[LeafEntry] = []
        visited: List[int] = []
        leaves = 0
        stack = [self._root]
        while stack:
            page_id = stack.pop()
            node = self._load(page_id, ledger)
            visited.append(page_id)
            if node.is_leaf:
                leaves += 1
                entries.extend(e for e in node.entries if rect.contains(e.point))
            else:
                stack.extend(e.child for e in reversed(node.entries) if e.rect.intersects(rect))
        return RangeResult(entries, leaves, visited)

    def overlapping_leaves(self, rect: Rect, ledger: Optional[AccessLedger] = None) -> LeafSelection:
        """
        Finds the leaves whose MBR intersects rect without reading leaf pages.

        Leaf MBRs live in their parents' entries, so only internal nodes are
        read. A root leaf is judged from the tree's root MBR and reads nothing.

        Returns:
        LeafSelection: (leaf pages, visited internal pages).
        """
        root = self._nodes[self._root]
        if root.is_leaf:
            hit = root.mbr is not None and root.mbr.intersects(rect)
            return LeafSelection([self._root] if hit else [], [])

        leaf_pages: List[int] = []
        visited: List[int] = []
        stack: List[Tuple[int, int]] = [(self._root, self._height - 1)]
        while stack:
            page_id, level = stack.pop()
            node = self._load(page_id, ledger)
            visited.append(page_id)
            hits = [e.child for e in node.entries if e.rect.intersects(rect)]
            if level == 1:
                leaf_pages.extend(hits)
            else:
                stack.extend((child, level - 1) for child in reversed(hits))
        return LeafSelection(leaf_pages, visited)

    def leaf_iterate(self) -> Iterator[Tuple[int, List[LeafEntry]]]:
        """Yields (leaf page id, entries) for every leaf, left to right."""
        stack = [self._root]
        while stack:
            node = self._nodes[stack.pop()]
            if node.is_leaf:
                yield node.page_id, list(node.entries)
            else:
                stack.extend(e.child for e in reversed(node.entries))

    ####################################################################
    #Structural audit
    ####################################################################

    def audit(self) -> List[str]:
        """
        Checks MBR minimality, occupancy and uniform leaf depth.

        Returns:
        list: human-readable violations; empty when the tree is sound.
        """
        problems: List[str] = []
        leaf_depths = set()

        def visit(page_id: int, depth: int) -> Optional[Rect]:
            node = self._nodes[page_id]
            count = len(node.entries)
            if count > self.params.fan_out:
                problems.append(f"page {page_id}: {count} entries exceed fan_out {self.params.fan_out}")
            if page_id != self._root and count < self.params.min_fill:
                problems.append(f"page {page_id}: {count} entries below min_fill {self.params.min_fill}")
            if node.is_leaf:
                leaf_depths.add(depth)
                rects = [e.rect for e in node.entries]
            else:
                rects = []
                for entry in node.entries:
                    child_mbr = visit(entry.child, depth + 1)
                    if child_mbr != entry.rect:
                        problems.append(f"page {page_id}: entry for page {entry.child} holds {entry.rect}, "
                                        f"child MBR is {child_mbr}")
                    rects.append(entry.rect)
            expected = Rect.union_all(rects) if rects else None
            if expected != node.mbr:
                problems.append(f"page {page_id}: stored MBR {node.mbr} differs from {expected}")
            return node.mbr

        visit(self._root, 0)
        if len(leaf_depths) > 1:
            problems.append(f"leaves at different depths {sorted(leaf_depths)}")
        return problems

    def __repr__(self):
        return (f"RStarTree(root={self._root}, height={self._height}, nodes={len(self._nodes)}, "
                f"augmented={self.augmented})")
