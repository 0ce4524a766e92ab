"""MCP server setup and main entry point"""

import os
from contextlib import asynccontextmanager
from typing import Any, AsyncIterator, Dict, List, Optional

from mcp.server.fastmcp import FastMCP

from .cli import parse, run_command
from .config import LAST_RUN_FILE, logger
from .runner import runner
from .tools import register_tools


@asynccontextmanager
async def server_lifespan(server: FastMCP) -> AsyncIterator[Dict[str, Any]]:
    """Manage server lifecycle"""
    try:
        logger.info("CubicLab MCP server starting...")
        yield {"runner": runner}
    finally:
        logger.info(f"CubicLab MCP server shutting down, {len(runner.laws)} cached laws dropped")
        runner.laws.clear()


# Create MCP server
mcp = FastMCP(
    name="CubicLab",
    instructions="Numerical laboratory for the cubic mean-field Ising model: phase portraits, "
                 "exact magnetization laws, Berry-Esseen certificates, concentration and tail checks",
    lifespan=server_lifespan,
)

# Register all tools
register_tools(mcp)


def serve() -> None:
    # Start from a clean state
    if os.path.exists(LAST_RUN_FILE):
        try:
            os.remove(LAST_RUN_FILE)
            logger.info("Removed existing state file for clean startup")
        except Exception as e:
            logger.error(f"Failed to remove existing state file: {e}")
    mcp.run()


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point: experiment subcommands or the MCP server"""
    args = parse(argv)
    if args.command == "serve":
        serve()
        return 0
    return run_command(args)


if __name__ == "__main__":
    raise SystemExit(main())
