/** JSONL read/write helpers. */

import { createWriteStream, readFileSync } from 'node:fs';

export function readJsonl<T>(path: string): T[] {
  const out: T[] = [];
  const lines = readFileSync(path, 'utf-8').split('\n');
  for (const line of lines) {
    if (line.trim()) out.push(JSON.parse(line) as T);
  }
  return out;
}

export async function writeJsonl(path: string, rows: unknown[]): Promise<void> {
  const stream = createWriteStream(path, { encoding: 'utf-8' });
  for (const row of rows) {
    stream.write(JSON.stringify(row) + '\n');
  }
  await new Promise<void>((resolve, reject) => {
    stream.end(() => resolve());
    stream.on('error', reject);
  });
}
