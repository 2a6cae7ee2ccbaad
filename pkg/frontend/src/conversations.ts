/**
 * Conversation grouping: consecutive utterances belong to one conversation
 * when the next starts within the gap threshold (3 s) of the previous
 * ending. Semantics mirror the core engine's `group_conversations` so
 * training conversations match what the analytics side derives.
 */

import { CONVERSATION_GAP_S } from './types.js';

export interface TimedItem {
  startS: number;
  endS: number;
}

/**
 * Group indices of time-sorted items into conversations. Items must belong
 * to one film/dialogue source; callers partition by source first.
 */
export function groupConversations<T extends TimedItem>(
  items: T[],
  gapS: number = CONVERSATION_GAP_S,
): T[][] {
  const sorted = [...items].sort((a, b) => a.startS - b.startS || a.endS - b.endS);
  const groups: T[][] = [];
  let current: T[] = [];
  let prevEnd = -Infinity;
  for (const item of sorted) {
    if (current.length > 0 && item.startS - prevEnd > gapS) {
      groups.push(current);
      current = [];
    }
    current.push(item);
    prevEnd = item.endS;
  }
  if (current.length) groups.push(current);
  return groups;
}
