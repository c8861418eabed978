import { readFileSync, readdirSync } from 'node:fs'
import { dirname, join } from 'node:path'
import { fileURLToPath } from 'node:url'

import { EmitEvent } from '../src/clockCanvas'
import { buildEvent } from '../src/api'
import { EventDoc, ScreenDoc } from '../src/types'

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), '..', 'fixtures', 'screens')

export function fixtureKinds(): string[] {
  return readdirSync(FIXTURES)
    .filter((name) => name.endsWith('.json'))
    .map((name) => name.replace(/\.json$/, ''))
    .sort()
}

export function loadFixture(kind: string): ScreenDoc {
  return JSON.parse(readFileSync(join(FIXTURES, `${kind}.json`), 'utf-8')) as ScreenDoc
}

export interface EventSpy {
  emit: EmitEvent
  events: EventDoc[]
}

export function eventSpy(): EventSpy {
  const events: EventDoc[] = []
  return {
    events,
    emit: (type, fields = {}) => {
      events.push(buildEvent(type, fields, 1615800000))
    },
  }
}
