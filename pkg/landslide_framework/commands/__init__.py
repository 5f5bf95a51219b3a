from .base import BaseCommand
from .registry import CommandRegistry

__all__ = ['BaseCommand', 'CommandRegistry']
