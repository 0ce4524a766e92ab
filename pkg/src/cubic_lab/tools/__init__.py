"""MCP Tool Functions Registration"""

from mcp.server.fastmcp import FastMCP

# Import all tool functions
from .phase import (
    phase_portrait,
    coexistence_point,
)

from .law import (
    magnetization_law_summary,
    kolmogorov_to_normal,
)

from .stein import (
    berry_esseen_certificate,
    concentration_table,
    cramer_table,
)

from .sampler import (
    sample_chain,
)


def register_tools(mcp: FastMCP) -> None:
    """Register all tool functions with the MCP server"""
    # Phase diagram tools
    mcp.tool()(phase_portrait)
    mcp.tool()(coexistence_point)

    # Exact law tools
    mcp.tool()(magnetization_law_summary)
    mcp.tool()(kolmogorov_to_normal)

    # Stein diagnostics tools
    mcp.tool()(berry_esseen_certificate)
    mcp.tool()(concentration_table)
    mcp.tool()(cramer_table)

    # Sampler tools
    mcp.tool()(sample_chain)
