import json
import logging
import math
from pathlib import Path
from typing import Dict, Mapping, Optional, Tuple, Union

import networkx as nx
from pydantic import ValidationError

from cng.errors import ErrorCode, SnapshotError
from cng.models import CngInstance, TrafficSnapshot
from cng.payoffs import validate
from utils.instance_generator import factors_from_eta

logger = logging.getLogger(__name__)

Adjustment = Tuple[float, float]  # (profit multiplier, weight multiplier)

KNOWN_ROLES = frozenset({"management", "router", "critical", "server", "service", "external"})

DEFAULT_DEFENDER_ADJUST: Dict[str, Adjustment] = {
    "management": (2.0, 1.5),
    "router": (2.0, 1.5),
    "critical": (2.0, 1.5),
}
DEFAULT_ATTACKER_ADJUST: Dict[str, Adjustment] = {}

NEUTRAL: Adjustment = (1.0, 1.0)


class SnapshotIngestor:
    """Turns a traffic snapshot of a network into a game instance.

    Profits are the total traffic through each node and weights their base-2
    logarithm; per-role multipliers then adjust the defender's (profit, weight)
    for critical infrastructure and, independently, the attacker's.
    """

    @staticmethod
    def load(path: Union[str, Path]) -> TrafficSnapshot:
        path = Path(path)
        logger.info(f"Loading traffic snapshot from {path}")
        try:
            return TrafficSnapshot.model_validate(json.loads(path.read_text()))
        except (json.JSONDecodeError, ValidationError) as e:
            raise SnapshotError(ErrorCode.INVALID_INSTANCE, f"malformed snapshot {path}: {e}") from e

    @staticmethod
    def traffic_graph(snapshot: TrafficSnapshot) -> nx.Graph:
        """Undirected graph over node indices; parallel edges are merged by summing traffic."""
        if not snapshot.nodes:
            raise SnapshotError(ErrorCode.EMPTY_SNAPSHOT, "snapshot has no nodes")
        index: Dict[str, int] = {}
        for i, node in enumerate(snapshot.nodes):
            if node.name in index:
                raise SnapshotError(ErrorCode.INVALID_INSTANCE, f"duplicate node name {node.name!r}")
            index[node.name] = i

        def resolve(endpoint: Union[int, str]) -> int:
            if isinstance(endpoint, int):
                if not 0 <= endpoint < len(snapshot.nodes):
                    raise SnapshotError(ErrorCode.INDEX_OUT_OF_RANGE, f"edge endpoint {endpoint} is not a node")
                return endpoint
            if endpoint not in index:
                raise SnapshotError(ErrorCode.INDEX_OUT_OF_RANGE, f"edge endpoint {endpoint!r} is not a node")
            return index[endpoint]

        graph = nx.Graph()
        for i, node in enumerate(snapshot.nodes):
            graph.add_node(i, name=node.name, role=node.role)
        for u, v, traffic in snapshot.edges:
            if traffic < 0:
                raise SnapshotError(ErrorCode.NEGATIVE_VALUE, f"edge ({u}, {v}) has negative traffic")
            i, j = resolve(u), resolve(v)
            if i == j:
                logger.warning(f"Ignoring self-loop on node {snapshot.nodes[i].name}")
                continue
            if graph.has_edge(i, j):
                graph[i][j]["traffic"] += traffic
            else:
                graph.add_edge(i, j, traffic=traffic)
        return graph

    @staticmethod
    def ingest(
        snapshot: TrafficSnapshot,
        gamma: float = 0.0,
        eta: float = 0.6,
        defender_budget_frac: float = 0.30,
        attacker_budget_frac: float = 0.10,
        defender_adjust: Optional[Mapping[str, Adjustment]] = None,
        attacker_adjust: Optional[Mapping[str, Adjustment]] = None,
    ) -> CngInstance:
        """Derive a game instance from a traffic snapshot.

        Args:
            snapshot: Nodes with roles and traffic-weighted edges
            gamma: Attacker opportunity-cost factor
            eta: Mitigated-attack factor; epsilon and delta follow as 1.25 eta and 0.80 eta
            defender_budget_frac: D as a fraction of the total defender weight
            attacker_budget_frac: A as a fraction of the total attacker weight
            defender_adjust: role -> (profit, weight) multipliers on (p^d, d)
            attacker_adjust: role -> (profit, weight) multipliers on (p^a, a)

        Returns:
            A validated instance keeping the collapsed edges as provenance
        """
        defender_adjust = DEFAULT_DEFENDER_ADJUST if defender_adjust is None else dict(defender_adjust)
        attacker_adjust = DEFAULT_ATTACKER_ADJUST if attacker_adjust is None else dict(attacker_adjust)
        roles = KNOWN_ROLES | set(defender_adjust) | set(attacker_adjust)
        for node in snapshot.nodes:
            if node.role not in roles:
                raise SnapshotError(ErrorCode.UNKNOWN_ROLE, f"node {node.name!r} has unknown role {node.role!r}")

        graph = SnapshotIngestor.traffic_graph(snapshot)
        p_d, p_a, d, a = [], [], [], []
        for i, node in enumerate(snapshot.nodes):
            traffic = graph.degree(i, weight="traffic")
            if traffic > 0:
                profit, weight = float(traffic), math.log2(max(traffic, 2.0))
            else:
                profit, weight = 1.0, 1.0
            pm_d, wm_d = defender_adjust.get(node.role, NEUTRAL)
            pm_a, wm_a = attacker_adjust.get(node.role, NEUTRAL)
            p_d.append(profit * pm_d)
            d.append(weight * wm_d)
            p_a.append(profit * pm_a)
            a.append(weight * wm_a)

        epsilon, delta = factors_from_eta(eta)
        edges = tuple(sorted((min(u, v), max(u, v), float(data["traffic"])) for u, v, data in graph.edges(data=True)))
        instance = CngInstance(
            n=len(snapshot.nodes),
            p_d=tuple(p_d),
            p_a=tuple(p_a),
            d=tuple(d),
            a=tuple(a),
            D=defender_budget_frac * math.fsum(d),
            A=attacker_budget_frac * math.fsum(a),
            delta=delta,
            eta=eta,
            epsilon=epsilon,
            gamma=gamma,
            edges=edges,
        )
        validate(instance)
        logger.info(
            f"Ingested snapshot with {instance.n} nodes and {len(edges)} links, "
            f"total traffic profit {instance.total_defender_profit:.6g}"
        )
        return instance
