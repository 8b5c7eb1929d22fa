"""Bundled scenarios: the GALLIUM-inspired company network and a tiny toy.

The company network is a reconstruction. Its 30 actions follow the attack
stages of a GALLIUM-style intrusion (reconnaissance, initial access through
the DMZ, credential access, lateral movement, collection and exfiltration
from DB, spyware on the printer server PS) plus the defenders' counters:
malicious-log detection on WS, privileged account management and command
monitoring on DB. Without defenders the shortest attacker plan takes 16
actions, 8 per attacker.
"""

from __future__ import annotations

from pathlib import Path

from .agents.config import DECISION_TREE, QLEARNING, RANDOM, BehaviorConfig, DTBranch, DTLeaf
from .core import ATTACKER, DEFENDER, NOOP_ACTION, ActionSpec, Property
from .metrics import EvalConfig
from .scenario import AgentSpec, NodeSpec, ScenarioSpec, save_scenario_file

SUBNETS = {
    "OUTSIDE": ("At1", "At2"),
    "DMZ": ("WS", "ES", "VPN", "FTP"),
    "ACC": ("E1", "E2", "CTO"),
    "MAR": ("PS", "E3", "TAB"),
    "SRV": ("API", "DB", "DC"),
}

ROLES = {
    "At1": ("attacker desktop", "Kali Linux"),
    "At2": ("attacker desktop", "Kali Linux"),
    "WS": ("web server", "Ubuntu 20.04 / Apache 2.4"),
    "ES": ("email server", "Windows Server 2016 / Exchange 2016"),
    "VPN": ("VPN server", "OpenVPN 2.4"),
    "FTP": ("FTP server", "Debian 10 / vsftpd"),
    "E1": ("employee workstation", "Windows 10"),
    "E2": ("employee workstation", "Windows 10"),
    "CTO": ("CTO workstation", "macOS 12"),
    "PS": ("printer server", "Windows Server 2012 R2"),
    "E3": ("employee workstation", "Windows 10"),
    "TAB": ("tablet", "Android 11"),
    "API": ("API server", "Ubuntu 20.04 / Flask"),
    "DB": ("database server", "Windows Server 2019 / SQL Server"),
    "DC": ("domain controller", "Windows Server 2019"),
}

GALLIUM_METRICS = (
    "attacker_goal_progress", "active_node_count", "lateral_move_count", "compromised_node_count", "action_count",
)


def subnet_of(node: str) -> str:
    for subnet, nodes in SUBNETS.items():
        if node in nodes:
            return subnet
    raise KeyError(node)


def topology_links() -> list[tuple[str, str]]:
    """Bidirectional links, each listed once with endpoints sorted.

    The DMZ servers talk to the outside and to every inside subnet; the
    inside subnets only reach each other through the DMZ.
    """
    links = set()
    inside = SUBNETS["ACC"] + SUBNETS["MAR"] + SUBNETS["SRV"]
    for dmz in SUBNETS["DMZ"]:
        for other in SUBNETS["OUTSIDE"] + inside:
            links.add(tuple(sorted((dmz, other))))
    for nodes in SUBNETS.values():
        for i, a in enumerate(nodes):
            for b in nodes[i + 1:]:
                links.add(tuple(sorted((a, b))))
    return sorted(links)


def _p(pid, value="true"):
    return Property(pid, value)


def _action(name, agents, pre, post, description="", success_prob=1.0):
    if pre and isinstance(pre[0], Property):
        pre = [pre]
    return ActionSpec(name, tuple(agents), tuple(tuple(a) for a in pre), tuple(post), success_prob, description)


def _rules_to_tree(rules, fallback=None):
    """[(alternatives, action), ...] -> nested tree; first match wins, else ``fallback`` (Pass)."""
    tree = DTLeaf(fallback)
    for condition, action in reversed(rules):
        tree = DTBranch(condition, DTLeaf(action), tree)
    return tree


A1 = "agents.attacker1"
A2 = "agents.attacker2"
FALSE, TRUE, NONE = "false", "true", "none"


def _node_properties():
    links = topology_links()
    neighbours = {n: set() for nodes in SUBNETS.values() for n in nodes}
    for a, b in links:
        neighbours[a].add(b)
        neighbours[b].add(a)

    extra = {
        "At1": [
            _p(f"{A1}.recon.employee_emails", FALSE),
            _p(f"{A1}.recon.dmz_services", FALSE),
            _p(f"{A1}.recon.mar_hosts", FALSE),
            _p(f"{A1}.recon.acc_hosts", FALSE),
            _p(f"{A1}.creds.mar_admin", FALSE),
        ],
        "At2": [
            _p(f"{A2}.recon.dmz_services", FALSE),
            _p(f"{A2}.recon.srv_hosts", FALSE),
            _p(f"{A2}.creds.domain", FALSE),
            _p(f"{A2}.creds.vpn", FALSE),
        ],
        "WS": [
            _p("WS.webapp.vulnerable", TRUE),
            _p("WS.webshell.present", FALSE),
            _p("WS.logs.malicious", FALSE),
            _p("WS.sessions.attacker2", NONE),
        ],
        "ES": [_p("ES.mail.attachment_filter", "off")],
        "VPN": [_p("VPN.sessions.attacker2", NONE)],
        "FTP": [_p("FTP.service.anonymous_login", "disabled")],
        "E1": [_p("E1.sessions.attacker1", NONE)],
        "E3": [_p("E3.sessions.attacker1", NONE)],
        "TAB": [_p("TAB.sessions.attacker1", NONE)],
        "PS": [
            _p("PS.sessions.attacker1", NONE),
            _p("PS.spyware.staged", FALSE),
            _p("PS.spyware.installed", FALSE),
        ],
        "API": [_p("API.webapp.vulnerable", TRUE), _p("API.sessions.attacker2", NONE)],
        "DB": [
            _p("DB.pam", "off"),
            _p("DB.accounts.api_service", "enabled"),
            _p("DB.audit.suspicious_commands", FALSE),
            _p("DB.sessions.attacker2", NONE),
            _p("DB.data.staged", FALSE),
            _p("DB.data.exfiltrated", FALSE),
        ],
        "DC": [_p("DC.sessions.attacker2", NONE)],
    }
    nodes = []
    for subnet, members in SUBNETS.items():
        for node in members:
            role, os_name = ROLES[node]
            props = [
                _p(f"{node}.active", TRUE),
                _p(f"{node}.role", role),
                _p(f"{node}.os", os_name),
                _p(f"{node}.net.subnet", subnet),
                _p(f"{node}.net.links", ",".join(sorted(neighbours[node]))),
            ]
            props.extend(extra.get(node, []))
            nodes.append(NodeSpec(node, tuple(props)))
    return tuple(nodes)


def _attacker1_actions():
    ag = ["attacker1"]
    s_e3 = "E3.sessions.attacker1"
    return [
        _action("a1_gather_victim_emails", ag,
                [_p(f"{A1}.recon.employee_emails", FALSE)],
                [_p(f"{A1}.recon.employee_emails", TRUE)],
                "T1589.002 gather employee email addresses"),
        _action("a1_spearphish_marketing", ag,
                [_p(f"{A1}.recon.employee_emails", TRUE), _p("ES.mail.attachment_filter", "off"), _p(s_e3, NONE)],
                [_p(s_e3, "user"), _p("E3.compromised_by.attacker1")],
                "T1566.001 spearphishing attachment relayed by ES to a marketing workstation"),
        _action("a1_discover_marketing_hosts", ag,
                [[_p(s_e3, "user"), _p(f"{A1}.recon.mar_hosts", FALSE)],
                 [_p(s_e3, "admin"), _p(f"{A1}.recon.mar_hosts", FALSE)]],
                [_p(f"{A1}.recon.mar_hosts", TRUE)],
                "T1018 remote system discovery from E3"),
        _action("a1_sideload_dll_e3", ag,
                [_p(s_e3, "user")],
                [_p(s_e3, "admin")],
                "T1574.002 DLL side-loading for privilege escalation on E3"),
        _action("a1_dump_credentials_e3", ag,
                [_p(s_e3, "admin"), _p(f"{A1}.creds.mar_admin", FALSE)],
                [_p(f"{A1}.creds.mar_admin", TRUE)],
                "T1003.001 LSASS memory dump on E3"),
        _action("a1_smb_lateral_to_ps", ag,
                [_p(f"{A1}.creds.mar_admin", TRUE), _p(f"{A1}.recon.mar_hosts", TRUE), _p("PS.sessions.attacker1", NONE)],
                [_p("PS.sessions.attacker1", "admin"), _p("PS.compromised_by.attacker1")],
                "T1021.002 SMB admin shares to the printer server"),
        _action("a1_transfer_spyware_ps", ag,
                [_p("PS.sessions.attacker1", "admin"), _p("PS.spyware.staged", FALSE)],
                [_p("PS.spyware.staged", TRUE)],
                "T1570 lateral tool transfer of the spyware"),
        _action("a1_install_spyware_ps", ag,
                [_p("PS.sessions.attacker1", "admin"), _p("PS.spyware.staged", TRUE), _p("PS.spyware.installed", FALSE)],
                [_p("PS.spyware.installed", TRUE)],
                "T1543.003 install the spyware as a Windows service"),
        _action("a1_scan_dmz", ag,
                [_p(f"{A1}.recon.dmz_services", FALSE)],
                [_p(f"{A1}.recon.dmz_services", TRUE)],
                "T1046 network service scanning of the DMZ"),
        _action("a1_spearphish_accounting", ag,
                [_p(f"{A1}.recon.employee_emails", TRUE), _p("ES.mail.attachment_filter", "off"),
                 _p("E1.sessions.attacker1", NONE)],
                [_p("E1.sessions.attacker1", "user"), _p("E1.compromised_by.attacker1")],
                "T1566.001 spearphishing attachment to an accounting workstation"),
        _action("a1_discover_accounting_hosts", ag,
                [_p("E1.sessions.attacker1", "user"), _p(f"{A1}.recon.acc_hosts", FALSE)],
                [_p(f"{A1}.recon.acc_hosts", TRUE)],
                "T1018 remote system discovery from E1"),
        _action("a1_compromise_tablet", ag,
                [_p(f"{A1}.recon.mar_hosts", TRUE), _p("TAB.sessions.attacker1", NONE)],
                [_p("TAB.sessions.attacker1", "user"), _p("TAB.compromised_by.attacker1")],
                "T1557 adversary-in-the-middle on the marketing wireless access point"),
    ]


def _attacker2_actions():
    ag = ["attacker2"]
    s_ws, s_vpn, s_api, s_db = (f"{n}.sessions.attacker2" for n in ("WS", "VPN", "API", "DB"))
    return [
        _action("a2_scan_dmz", ag,
                [_p(f"{A2}.recon.dmz_services", FALSE)],
                [_p(f"{A2}.recon.dmz_services", TRUE)],
                "T1046 network service scanning of the DMZ"),
        _action("a2_exploit_web_server", ag,
                [_p(f"{A2}.recon.dmz_services", TRUE), _p("WS.webapp.vulnerable", TRUE), _p(s_ws, NONE)],
                [_p(s_ws, "user"), _p("WS.compromised_by.attacker2"), _p("WS.logs.malicious", TRUE)],
                "T1190 exploit the public-facing web application"),
        _action("a2_install_web_shell", ag,
                [_p(s_ws, "user"), _p("WS.webshell.present", FALSE)],
                [_p("WS.webshell.present", TRUE)],
                "T1505.003 China Chopper style web shell"),
        _action("a2_dump_credentials_ws", ag,
                [_p(s_ws, "user"), _p("WS.webshell.present", TRUE), _p(f"{A2}.creds.domain", FALSE)],
                [_p(f"{A2}.creds.domain", TRUE)],
                "T1003 credential dumping through the web shell"),
        _action("a2_discover_server_hosts", ag,
                [[_p(s_ws, "user"), _p(f"{A2}.recon.srv_hosts", FALSE)],
                 [_p(s_vpn, "user"), _p(f"{A2}.recon.srv_hosts", FALSE)]],
                [_p(f"{A2}.recon.srv_hosts", TRUE)],
                "T1018 remote system discovery of the SRV subnet"),
        _action("a2_access_db_valid_accounts", ag,
                [_p(f"{A2}.creds.domain", TRUE), _p(f"{A2}.recon.srv_hosts", TRUE), _p("DB.pam", "off"), _p(s_db, NONE)],
                [_p(s_db, "user"), _p("DB.compromised_by.attacker2"), _p("DB.audit.suspicious_commands", TRUE)],
                "T1078.002 log in to DB with stolen domain accounts"),
        _action("a2_archive_db_data", ag,
                [_p(s_db, "user"), _p("DB.data.staged", FALSE)],
                [_p("DB.data.staged", TRUE)],
                "T1560.001 archive collected data with a utility"),
        _action("a2_exfiltrate_db_data", ag,
                [_p(s_db, "user"), _p("DB.data.staged", TRUE), _p("DB.data.exfiltrated", FALSE)],
                [_p("DB.data.exfiltrated", TRUE)],
                "T1041 exfiltration over the C2 channel"),
        _action("a2_bruteforce_vpn", ag,
                [_p(f"{A2}.recon.dmz_services", TRUE), _p(f"{A2}.creds.vpn", FALSE)],
                [_p(f"{A2}.creds.vpn", TRUE)],
                "T1110.003 password spraying against the VPN"),
        _action("a2_login_vpn", ag,
                [_p(f"{A2}.creds.vpn", TRUE), _p(s_vpn, NONE)],
                [_p(s_vpn, "user"), _p("VPN.compromised_by.attacker2")],
                "T1133 external remote services"),
        _action("a2_exploit_api_server", ag,
                [_p(s_vpn, "user"), _p(f"{A2}.recon.srv_hosts", TRUE), _p("API.webapp.vulnerable", TRUE), _p(s_api, NONE)],
                [_p(s_api, "user"), _p("API.compromised_by.attacker2")],
                "T1190 exploit the internal API server from the VPN"),
        _action("a2_query_db_via_api", ag,
                [_p(s_api, "user"), _p("DB.accounts.api_service", "enabled"), _p(s_db, NONE)],
                [_p(s_db, "user"), _p("DB.compromised_by.attacker2"), _p("DB.audit.suspicious_commands", TRUE)],
                "T1213 reach DB through the API service account"),
        _action("a2_rdp_to_domain_controller", ag,
                [_p(f"{A2}.creds.domain", TRUE), _p(f"{A2}.recon.srv_hosts", TRUE), _p("DC.sessions.attacker2", NONE)],
                [_p("DC.sessions.attacker2", "user"), _p("DC.compromised_by.attacker2")],
                "T1021.001 remote desktop to the domain controller"),
    ]


def _defender_actions():
    return [
        _action("d1_detect_malicious_logs", ["defender1"],
                [_p("WS.logs.malicious", TRUE)],
                [_p("WS.logs.malicious", FALSE), _p("WS.sessions.attacker2", NONE),
                 _p("WS.compromised_by.attacker2", None), _p("WS.webapp.vulnerable", FALSE)],
                "DS0015 application log review: evict the intruder and patch the web app"),
        _action("d1_remove_web_shell", ["defender1"],
                [_p("WS.webshell.present", TRUE)],
                [_p("WS.webshell.present", FALSE)],
                "M1042 remove the web shell from the web root"),
        _action("d2_privileged_account_management", ["defender2"],
                [_p("DB.pam", "off")],
                [_p("DB.pam", "enforced")],
                "M1026 privileged account management on DB"),
        _action("d2_monitor_executed_commands", ["defender2"],
                [_p("DB.audit.suspicious_commands", TRUE)],
                [_p("DB.audit.suspicious_commands", FALSE), _p("DB.sessions.attacker2", NONE),
                 _p("DB.compromised_by.attacker2", None), _p("DB.accounts.api_service", "disabled"),
                 _p("DB.pam", "enforced")],
                "DS0017 command execution monitoring: kill the session, lock the accounts"),
    ]


def _noop():
    return _action(NOOP_ACTION, ["attacker1", "attacker2", "defender1", "defender2"], [], [], "do nothing this turn")


def _rules_from_actions(actions, names):
    by_name = {a.name: a for a in actions}
    return [(by_name[n].pre_alternatives, n) for n in names]


ATTACKER1_PLAN = (
    "a1_install_spyware_ps",
    "a1_transfer_spyware_ps",
    "a1_smb_lateral_to_ps",
    "a1_dump_credentials_e3",
    "a1_sideload_dll_e3",
    "a1_discover_marketing_hosts",
    "a1_spearphish_marketing",
    "a1_gather_victim_emails",
)

ATTACKER2_PLAN = (
    "a2_exfiltrate_db_data",
    "a2_archive_db_data",
    "a2_access_db_valid_accounts",
    "a2_query_db_via_api",
    "a2_exploit_api_server",
    "a2_discover_server_hosts",
    "a2_dump_credentials_ws",
    "a2_install_web_shell",
    "a2_exploit_web_server",
    "a2_login_vpn",
    "a2_bruteforce_vpn",
    "a2_scan_dmz",
)


def gallium_trees(actions):
    """Decision trees: each agent plays its highest-priority applicable move."""
    defender1 = _rules_to_tree([
        (((_p("WS.logs.malicious", TRUE),),), "d1_detect_malicious_logs"),
        (((_p("WS.webshell.present", TRUE),),), "d1_remove_web_shell"),
    ])
    defender2 = _rules_to_tree([
        (((_p("DB.audit.suspicious_commands", TRUE),),), "d2_monitor_executed_commands"),
        (((_p("DB.pam", "off"),),), "d2_privileged_account_management"),
    ])
    return {
        "attacker1": _rules_to_tree(_rules_from_actions(actions, ATTACKER1_PLAN)),
        "attacker2": _rules_to_tree(_rules_from_actions(actions, ATTACKER2_PLAN)),
        "defender1": defender1,
        "defender2": defender2,
    }


# Attackers watch the properties their goal chains depend on; side
# effects of the decoy actions stay out of their observations.
ATTACKER1_OBSERVES = (
    f"{A1}.recon.employee_emails",
    f"{A1}.recon.mar_hosts",
    f"{A1}.creds.mar_admin",
    "ES.mail.attachment_filter",
    "E3.sessions.attacker1",
    "PS.sessions.attacker1",
    "PS.spyware.*",
)
ATTACKER2_OBSERVES = (
    f"{A2}.*",
    "WS.sessions.attacker2",
    "WS.webapp.vulnerable",
    "WS.webshell.present",
    "VPN.sessions.attacker2",
    "API.sessions.attacker2",
    "API.webapp.vulnerable",
    "DB.sessions.attacker2",
    "DB.pam",
    "DB.accounts.api_service",
    "DB.data.*",
)


def build_gallium(attackers: str = DECISION_TREE, defenders: str = DECISION_TREE,
                  max_cycles: int = 200) -> ScenarioSpec:
    """The company-network battle; ``attackers`` / ``defenders`` pick the behavior kind."""
    actions = (*_attacker1_actions(), *_attacker2_actions(), *_defender_actions(), _noop())
    trees = gallium_trees(actions)

    def behavior(agent_id, kind):
        if kind == DECISION_TREE:
            return BehaviorConfig(DECISION_TREE, tree=trees[agent_id])
        return BehaviorConfig(kind)

    agents = (
        AgentSpec("attacker1", ATTACKER, "At1", ATTACKER1_OBSERVES, behavior("attacker1", attackers)),
        AgentSpec("attacker2", ATTACKER, "At2", ATTACKER2_OBSERVES, behavior("attacker2", attackers)),
        AgentSpec("defender1", DEFENDER, "WS", ("WS.*",), behavior("defender1", defenders)),
        AgentSpec("defender2", DEFENDER, "DB", ("DB.*",), behavior("defender2", defenders)),
    )
    goal = ((_p("DB.data.exfiltrated", TRUE), _p("PS.spyware.installed", TRUE)),)
    # Attackers pay 2 per cycle, 1 less per goal conjunct held; the
    # defenders get the opposite plus 0.01 per active node.
    evaluation = EvalConfig(weights=((1.0, 0.0, 0.0, 0.0, -0.25), (-1.0, 0.01, 0.0, 0.0, 0.0)), bias=(-2.0, 0.0))
    name = "gallium" if attackers == DECISION_TREE else f"gallium-{attackers}"
    return ScenarioSpec(name, _node_properties(), actions, agents, goal, max_cycles, GALLIUM_METRICS, evaluation)


def build_toy(behavior: str = RANDOM, max_cycles: int = 6) -> ScenarioSpec:
    """Two nodes, four actions, one attacker; the goal needs three actions."""
    nodes = (
        NodeSpec("gw", (
            _p("gw.active", TRUE),
            _p("gw.net.subnet", "outside"),
            _p("gw.net.links", "srv"),
            _p("gw.scanned", FALSE),
        )),
        NodeSpec("srv", (
            _p("srv.active", TRUE),
            _p("srv.net.subnet", "internal"),
            _p("srv.net.links", "gw"),
            _p("srv.session", NONE),
            _p("srv.data.exfiltrated", FALSE),
        )),
    )
    ag = ["attacker"]
    actions = (
        _action("scan", ag, [_p("gw.scanned", FALSE)], [_p("gw.scanned", TRUE)], "discover the server"),
        _action("exploit", ag, [_p("gw.scanned", TRUE), _p("srv.session", NONE)],
                [_p("srv.session", "user"), _p("srv.compromised_by.attacker")],
                "exploit the server; works half the time", success_prob=0.5),
        _action("exfiltrate", ag, [_p("srv.session", "user"), _p("srv.data.exfiltrated", FALSE)],
                [_p("srv.data.exfiltrated", TRUE)], "copy the data out"),
        _action("make_noise", ag, [], [_p("gw.noise", TRUE)], "generate noise traffic"),
    )
    if behavior == DECISION_TREE:
        cfg = BehaviorConfig(DECISION_TREE, tree=_rules_to_tree(_rules_from_actions(actions, ("exfiltrate", "exploit", "scan")),
                                                  fallback="make_noise"))
    else:
        cfg = BehaviorConfig(behavior)
    agents = (AgentSpec("attacker", ATTACKER, "gw", ("gw.*", "srv.session", "srv.data.*"), cfg),)
    goal = ((_p("srv.data.exfiltrated", TRUE),),)
    evaluation = EvalConfig(weights=((1.0, 0.0), (-1.0, -0.5)), bias=(-1.0, 0.0))
    return ScenarioSpec("toy", nodes, actions, agents, goal, max_cycles,
                        ("attacker_goal_progress", "compromised_node_count"), evaluation)


BUNDLED = {
    "gallium.json": lambda: build_gallium(),
    "gallium_marl.json": lambda: build_gallium(attackers=QLEARNING),
    "toy.json": lambda: build_toy(),
}


def write_bundled(directory) -> list[Path]:
    """Write every bundled scenario as canonical JSON into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, builder in BUNDLED.items():
        path = directory / name
        save_scenario_file(builder(), path)
        written.append(path)
    return written
