/**
 * Wire types for the service's JSON protocol, validated with zod.
 *
 * The service omits null fields (`exclude_none`), so everything beyond the
 * envelope is optional here and normalised by the view layer.
 */
import { z } from "zod";

export const PosSchema = z.object({
  line: z.number().int().min(1),
  col: z.number().int().min(1),
  len: z.number().int().min(0),
});

export const ModelLineSchema = z.object({
  m_field: z.string(),
  descriptor: z.string().optional(),
  text: z.string().default(""),
  feedback_kind: z.enum([
    "correct",
    "incomplete",
    "superfluous",
    "syntax",
    "missing",
  ]),
  pos: PosSchema.optional(),
  template: z.string().optional(),
  variants: z.array(z.number().int()).default([]),
  entry: z.number().int().optional(),
});

export const RefLineSchema = z.object({
  kind: z.enum(["theory", "problem", "method"]),
  id: z.string(),
  entered: z.boolean(),
  pos: PosSchema.optional(),
});

export const PrecondLineSchema = z.object({
  holds: z.boolean(),
  text: z.string(),
  pos: PosSchema.optional(),
  note: z.string().optional(),
});

export const ProposalSchema = z.object({
  tactic: z.string(),
  field: z.string().optional(),
  text: z.string().optional(),
});

export const TrailEntrySchema = z.object({
  path: z.string(),
  holds: z.boolean(),
  preconds: z.array(PrecondLineSchema).default([]),
});

export const ListingSchema = z.object({
  id: z.string(),
  text: z.string().default(""),
});

export const ProtocolResponseSchema = z.object({
  session_id: z.string().optional(),
  status: z.enum(["ok", "error"]),
  message: z.string().optional(),
  view: z.enum(["Problem", "Method"]).optional(),
  model_render: z.array(ModelLineSchema).default([]),
  refs_render: z.array(RefLineSchema).default([]),
  preconds_render: z.array(PrecondLineSchema).default([]),
  all_preconds_true: z.boolean().optional(),
  is_complete: z.boolean().optional(),
  method_complete: z.boolean().optional(),
  finished: z.boolean().optional(),
  live_variants: z.array(z.number().int()).default([]),
  proposals: z.array(ProposalSchema).optional(),
  trail: z.array(TrailEntrySchema).optional(),
  matched: z.string().optional(),
  handoff: z.unknown().optional(),
  listing: z.array(ListingSchema).optional(),
  blockers: z.array(z.string()).optional(),
});

export type Pos = z.infer<typeof PosSchema>;
export type ModelLine = z.infer<typeof ModelLineSchema>;
export type RefLine = z.infer<typeof RefLineSchema>;
export type PrecondLine = z.infer<typeof PrecondLineSchema>;
export type Proposal = z.infer<typeof ProposalSchema>;
export type TrailEntry = z.infer<typeof TrailEntrySchema>;
export type Listing = z.infer<typeof ListingSchema>;
export type ProtocolResponse = z.infer<typeof ProtocolResponseSchema>;

export interface ProtocolRequest {
  session_id?: string | null;
  command: string;
  payload?: Record<string, unknown>;
}

export function parseResponse(data: unknown): ProtocolResponse {
  return ProtocolResponseSchema.parse(data);
}
