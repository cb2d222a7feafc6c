from .model import (HEAD, MEMBER, POSITION_BASED, PROTOCOLS, UNAFFILIATED, WITH_RECOVERY,
                    ClusterView, NodeState, ProtocolConfig, ZoneGrid)

__all__ = ["HEAD", "MEMBER", "UNAFFILIATED", "PROTOCOLS", "POSITION_BASED", "WITH_RECOVERY",
           "ClusterView", "NodeState", "ProtocolConfig", "ZoneGrid"]
