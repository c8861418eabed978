/** Wire types mirroring the session service's JSON contract. */

export interface SpeechSegment {
  text: string
  display_at: number
}

export interface PublicOption {
  id: string
  text: string
}

export interface Progress {
  current: number
  total: number
}

export type InputMode = 'buttons' | 'clock_canvas' | 'none'

export interface ScreenDoc {
  schema_version: number
  kind: string
  instruction: string
  speech_segments: SpeechSegment[]
  options: PublicOption[]
  input_mode: InputMode
  min_selections: number
  max_selections: number
  confirm_enabled: boolean
  soft_time_limit: number | null
  progress: Progress
  selected: string[]
  feedback: string | null
  extra: Record<string, unknown>
}

export type EventType =
  | 'select'
  | 'deselect'
  | 'confirm'
  | 'clock_tap'
  | 'number_entered'
  | 'number_moved'
  | 'number_deleted'
  | 'hand_drawn'
  | 'element_confirmed'
  | 'timeout_elapsed'
  | 'abort'
  | 'answer_environment'

export interface EventDoc {
  schema_version: number
  type: EventType
  ts: number
  option_id?: string
  question_id?: string
  answer?: 'yes' | 'no'
  value?: number
  element_id?: string
  x?: number
  y?: number
  x1?: number
  y1?: number
  x2?: number
  y2?: number
}

export interface SessionCreated {
  schema_version: number
  session_id: string
  screen: ScreenDoc
}

export interface EventResponse {
  schema_version: number
  status: 'in_progress' | 'finished' | 'aborted'
  screen?: ScreenDoc
  report_url?: string
}

export interface PlacedNumber {
  id: string
  value: number
  x: number
  y: number
}

export interface PlacedHand {
  id: string
  x1: number
  y1: number
  x2: number
  y2: number
}
