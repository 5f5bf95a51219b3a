from typing import Dict, List, Optional, Type

from ..exceptions import ConfigurationError
from ..models import CommandMetadata
from .base import BaseCommand


class CommandRegistry:
    """Central registry for CLI subcommands"""

    def __init__(self):
        self.commands: Dict[str, CommandMetadata] = {}
        self._implementations: Dict[str, Type[BaseCommand]] = {}

    def register(self, *, metadata: CommandMetadata, implementation: Type[BaseCommand]) -> None:
        """Register a subcommand and its implementation"""
        if metadata.name in self.commands:
            raise ConfigurationError(f"Command {metadata.name} is already registered")
        self.commands[metadata.name] = metadata
        self._implementations[metadata.name] = implementation

    def get_command(self, name: str) -> Optional[CommandMetadata]:
        return self.commands.get(name)

    def get_implementation(self, name: str) -> Optional[Type[BaseCommand]]:
        return self._implementations.get(name)

    def list_commands(self) -> List[CommandMetadata]:
        """Registered metadata in registration order"""
        return list(self.commands.values())
